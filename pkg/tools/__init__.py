"""Command-line tools for blochmodes."""
