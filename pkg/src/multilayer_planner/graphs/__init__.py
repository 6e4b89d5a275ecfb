"""Graph helpers: networkx conversions, fiber path algorithms,
random fixtures and the allocation table drawing."""
