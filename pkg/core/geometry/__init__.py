from .shape import ShapeS
from .graph import GeomGraph, build_graph, connected_components, graph_from_edges
from .packing import PackingResolution, PackingResult, packing_constant, resolve_packing_constant
from .volume import exact_union_volumes, lens_area, union_volume

__all__ = [
    "ShapeS",
    "GeomGraph",
    "build_graph",
    "connected_components",
    "graph_from_edges",
    "PackingResult",
    "PackingResolution",
    "packing_constant",
    "resolve_packing_constant",
    "exact_union_volumes",
    "lens_area",
    "union_volume",
]
