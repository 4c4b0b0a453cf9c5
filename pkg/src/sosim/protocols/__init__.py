"""Self-organization, search, and field protocols over the world engine."""
