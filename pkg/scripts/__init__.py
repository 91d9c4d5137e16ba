"""Helper scripts for lochaus."""
