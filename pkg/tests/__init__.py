"""Tests package for blochmodes."""
