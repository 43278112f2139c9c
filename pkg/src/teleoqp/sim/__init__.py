"""Deterministic two-arm simulator: scenarios, loop, telemetry, service."""
