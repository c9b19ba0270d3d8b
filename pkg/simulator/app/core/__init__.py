"""Settings, logging and errors shared across the simulator"""
