"""Reinforcement-learning rate adaptation on a simulated 802.11n link."""

__version__ = "0.1.0"
