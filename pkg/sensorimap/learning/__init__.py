"""Associative bridge between maps and the distortion-triggered re-adaptation protocol."""
