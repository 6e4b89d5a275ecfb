"""Multilayer optical transport network planner."""
