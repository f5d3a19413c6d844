"""Sentence alignment for parallel documents, with ladder files and strict evaluation."""

from .baseline import GaleChurchParams, gale_church_align
from .beads import Bead, Ladder, ValidationReport, parse_ladder, render_ladder, validate_ladder
from .corpus import CorpusStats, Document, Sentence, corpus_stats, load_document, render_indexed
from .evaluate import Metrics, StrictCounts, compare_report, micro_average, prf, strict_compare

__version__ = "0.1.0"
