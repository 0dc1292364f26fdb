"""trackfuse: radar + thermal-camera people tracking and fusion toolkit.

The processing chain: radar point clouds are clustered (DBSCAN plus a
Gaussian-mixture refinement for subjects walking close together) and
tracked with a constant-velocity Kalman filter; thermal-camera face
detections are tracked with an EKF that couples bounding-box height to
metric distance; tracks from the two sensors are associated through
variance-normalized distance/projection costs and a Hungarian assignment;
raw temperature readings are corrected with a fitted distance model; and
subjects are re-identified from gait features with a weighted extreme
learning machine. A seedable simulator stands in for the hardware.
"""

from .assignment import solve_assignment
from .clustering import (
    ClusterLabeling,
    GaussianMixtureResult,
    NOISE,
    TrackPrior,
    dbscan,
    gm_fit,
    nearby_groups,
    refine_clusters,
)
from .config import DEFAULT_CONFIG, SystemConfig
from .errors import TrackFuseError
from .fusion import (
    AlphaModel,
    FusedIdentity,
    associate_tracks,
    corrected_temperature,
    cost_distance,
    cost_horizontal,
    fit_alpha,
    track_length_weight,
)
from .geometry import CameraModel, RigidTransform, project_to_image, transform_to_camera
from .pipeline import RunResult, load_run, run_pipeline, write_run
from .pointcloud import PointCloudFrame, RadarPoint
from .radar import RadarTrack, RadarTracker, associate_observations, kf_predict, kf_update
from .reid import (
    FeatureStore,
    WELMModel,
    cs_baseline,
    extract_features,
    reidentify,
    welm_score,
    welm_train,
)
from .sim import (
    GaitSignature,
    Scenario,
    SubjectScript,
    generate_trajectory,
    load_scenario,
    run_scenario,
    save_scenario,
    synthesize_point_cloud,
    synthesize_thermal_detections,
)
from .thermal import (
    FaceDetection,
    FaceTrack,
    FaceTracker,
    GModel,
    ekf_predict,
    ekf_update,
    fit_g,
    read_temperature,
)

__version__ = "0.1.0"

__all__ = [
    "AlphaModel",
    "CameraModel",
    "ClusterLabeling",
    "DEFAULT_CONFIG",
    "FaceDetection",
    "FaceTrack",
    "FaceTracker",
    "FeatureStore",
    "FusedIdentity",
    "GaitSignature",
    "GaussianMixtureResult",
    "GModel",
    "NOISE",
    "PointCloudFrame",
    "RadarPoint",
    "RadarTrack",
    "RadarTracker",
    "RigidTransform",
    "RunResult",
    "Scenario",
    "SubjectScript",
    "SystemConfig",
    "TrackFuseError",
    "TrackPrior",
    "WELMModel",
    "associate_observations",
    "associate_tracks",
    "corrected_temperature",
    "cost_distance",
    "cost_horizontal",
    "cs_baseline",
    "dbscan",
    "ekf_predict",
    "ekf_update",
    "extract_features",
    "fit_alpha",
    "fit_g",
    "generate_trajectory",
    "gm_fit",
    "kf_predict",
    "kf_update",
    "load_run",
    "load_scenario",
    "nearby_groups",
    "project_to_image",
    "read_temperature",
    "refine_clusters",
    "reidentify",
    "run_pipeline",
    "run_scenario",
    "save_scenario",
    "solve_assignment",
    "synthesize_point_cloud",
    "synthesize_thermal_detections",
    "track_length_weight",
    "transform_to_camera",
    "welm_score",
    "welm_train",
    "write_run",
]
