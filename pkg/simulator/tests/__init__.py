"""Test package for the lossy loop simulator"""
