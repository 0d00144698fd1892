"""Experiment plumbing: scenarios, configs, oracle metrics, runner, persistence and CLI."""
