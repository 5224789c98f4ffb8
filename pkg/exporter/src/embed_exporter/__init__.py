"""Batch image-embedding exporter for the dehazing harness's curation stage."""

from .encoders import EMBED_DIM, make_encoder
from .export import ExportError, ExportJob, export_embeddings

__version__ = "0.1.0"

__all__ = ["EMBED_DIM", "ExportError", "ExportJob", "export_embeddings", "make_encoder"]
