"""xpathsmith: turn a field query plus a few seed pages into a reusable XPath.

Stage one reads sanitized pages with an LLM and extracts target values and
cue texts. Stage two condenses each page around those targets, asks the LLM
to program an XPath, and repairs it over a bounded feedback loop. Everything
downstream of the transport is deterministic and replayable.
"""

from .dom import DomDocument, DomNode, parse_html, serialize, visible_text

__all__ = [
    "DomDocument",
    "DomNode",
    "parse_html",
    "serialize",
    "visible_text",
]

__version__ = "0.1.0"
