"""Constant-factor approximation for capacitated domination on outerplanar and planar graphs."""
