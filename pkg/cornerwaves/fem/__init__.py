"""P1 assembly and Laplace solvers."""
