"""Rational approximation of Cauchy transforms at arbitrary precision."""
