"""Figure scripts for dharper CSV outputs.  Pure consumer: reads the
documented CSV/meta schemas and renders images, no physics computed here."""

__version__ = "0.1.0"
