"""Surface wave state and Crank-Nicolson time stepping."""
