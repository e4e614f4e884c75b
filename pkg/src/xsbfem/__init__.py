"""Heaviside-enriched finite elements coupled to scaled boundary crack-tip subdomains."""

__version__ = "0.1.0"
