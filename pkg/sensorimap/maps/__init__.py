"""Self-organizing lattices: plain Kohonen SOM and the varying-density variant."""
