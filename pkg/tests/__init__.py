# Intentionally empty; marks tests as a package.
