"""Table region detection in PDF documents."""
