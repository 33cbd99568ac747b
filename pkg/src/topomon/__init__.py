"""topomon: monitor trained feed-forward networks through the topology of
their activation graphs.

The pipeline: a (network, input) pair induces one weighted bipartite graph
per layer; each graph's maximum spanning tree yields a fixed-size persistence
diagram; diagrams are compared to per-class rank-wise mean diagrams fitted on
training data, and the average distance over layers is the observation's
Topological Uncertainty. High TU flags inputs that drive the network unlike
anything seen during fitting, which powers out-of-distribution detection,
distribution-shift monitoring, and trained-network selection.
"""

from ._kernels import backend_name as kernel_backend
from .data import Dataset, load_dataset, save_dataset
from .datagen import (
    ShiftSpec,
    SimpleGraph,
    corrupt_pixels,
    fake_graphs,
    gaussian_blobs,
    gaussian_blur,
    gaussian_images,
    graph_spectral_features,
    jacobi_eigendecomposition,
    synthetic_dataset,
    two_moons,
    uniform_images,
)
from .errors import (
    ClassUncoveredError,
    FileFormatError,
    FingerprintMismatchError,
    TopomonError,
)
from .metrics import (
    diagram_distance,
    frechet_mean,
    matching_distance_oracle,
    total_persistence,
)
from .model import (
    ActivationTrace,
    DenseLayer,
    NetworkModel,
    TrainResult,
    evaluate_accuracy,
    forward,
    load_network,
    loss_and_gradients,
    network_fingerprint,
    predict,
    save_network,
    train_toy,
)
from .monitor import (
    DetectionReport,
    DetectorConfig,
    SelectionResult,
    ShiftSummary,
    calibrate_threshold,
    confidence_scores,
    detect,
    roc_metrics,
    selection_score,
    shift_monitor,
)
from .profile import (
    TopologicalProfile,
    TUReport,
    fit_profile,
    load_profile,
    save_profile,
    score_batch,
    topological_uncertainty,
    tu_min_over_train,
)
from .topology import (
    ActivationGraph,
    PersistenceDiagram,
    activation_graph,
    diagrams_for,
    diagrams_from_trace,
    lipschitz_constants,
    persistence_diagram,
)

__version__ = "0.1.0"
