"""Containment checking for PLC sequential function charts via Petri nets.

The pipeline: parse two SFC programs, translate each to a tick-annotated
1-safe Petri net, decompose the nets into path covers between cut-points,
and decide whether every behavior of the original net is contained in the
upgraded one by symbolic path equivalence (guard sequences, data
transformations, tick stamps).
"""

from .sfc_core import parse_sfc, validate_sfc, pretty_print, SfcProgram
from .petri_net import translate, simulate, PetriNet, Marking
from .path_engine import path_constructor, static_cut_points, PathCover, Path
from .containment import containment_checker, Correspondences, Verdict
from .report import build_report, render_text, render_json

__all__ = [
    "parse_sfc",
    "validate_sfc",
    "pretty_print",
    "SfcProgram",
    "translate",
    "simulate",
    "PetriNet",
    "Marking",
    "path_constructor",
    "static_cut_points",
    "PathCover",
    "Path",
    "containment_checker",
    "Correspondences",
    "Verdict",
    "build_report",
    "render_text",
    "render_json",
]

__version__ = "0.1.0"
