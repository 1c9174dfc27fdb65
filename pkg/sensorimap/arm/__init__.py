"""Simulated 2-link planar arm used as ground truth for babbling and evaluation."""
