"""Online kernel graph change-point detection for heterogeneous streams on graphs."""
from .detector import DetectionResult, DetectorConfig, OKGDDetector, default_lambda, run
from .dictionary import NodeDictionary
from .graph import Graph, knn_graph, laplacian, sample_sbm, smoothness
from .kernels import KernelSpec, median_heuristic

__all__ = [
    "DetectionResult",
    "DetectorConfig",
    "Graph",
    "KernelSpec",
    "NodeDictionary",
    "OKGDDetector",
    "default_lambda",
    "knn_graph",
    "laplacian",
    "median_heuristic",
    "run",
    "sample_sbm",
    "smoothness",
]

__version__ = "0.1.0"
