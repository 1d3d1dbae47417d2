"""Exact partition functions of small tori: integer currents, transfer matrices, quadrature."""
