"""adthemes: match policy themes to political social-media ads.

Pipeline: ingest ads from an ad-archive API or NDJSON, normalize their
text to bags of lemmas, match themes via curated word-list intersections,
refine the lists with human accept/reject verdicts until convergence, and
report theme, ownership and demographic aggregates.
"""

__version__ = "0.1.0"
