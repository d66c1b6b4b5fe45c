"""Anonymous parking authentication from zero-knowledge set membership."""

__version__ = "0.1.0"
