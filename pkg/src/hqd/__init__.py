"""Quadrature domains for the Helmholtz operator via partial balayage."""
