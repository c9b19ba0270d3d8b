"""Simulation services: channel, plant, control, compensation, engine and I/O"""
