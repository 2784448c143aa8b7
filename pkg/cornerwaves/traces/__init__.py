"""Surface trace fields, semi-norms and the corner weight."""
