"""Reproduction harness: experiment config, evaluation, exports, snapshots and scenarios."""
