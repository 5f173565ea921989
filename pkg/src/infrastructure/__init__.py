"""Infrastructure modules for the application."""

# Subpackages are imported on use; observability is imported by the domain
# layer, so nothing here may import the domain eagerly.
