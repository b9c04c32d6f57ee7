"""Simulated network, protocol runs, the IndDistress game and statistics."""
