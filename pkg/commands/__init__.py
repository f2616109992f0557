"""Command modules for polytomo."""
