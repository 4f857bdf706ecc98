"""Radar-camera fusion geometry engine.

Non-neural core of a center-based radar-camera 3D detection pipeline:
frustum association, pillar expansion, feature rasterization, box decoding
and detection metrics, plus a synthetic-scene harness and CLI.
"""

from .geometry import (Box2D, Box3D, CameraModel, Pose, box3d_corners,
                       box3d_to_box2d, decode_orientation, encode_orientation,
                       normalize_angle, project_to_image, transform_point)
from .radar import (RadarPillar, RadarPoint, RadarSweep, aggregate_sweeps,
                    expand_pillars, radial_project)
from .frustum import (Association, FrustumMode, FrustumRoI, associate,
                      associate_by_containment, build_frustum, pillar_in_frustum)
from .feature_maps import (FeatureMapStack, depth_decode, depth_encode,
                           gaussian_radius, rasterize_radar_features,
                           render_gt_heatmap)
from .objectives import LossConfig, bce_loss, focal_loss, l1_loss
from .decoder import (DetectionRecord, Peak, PrimaryHead, SecondaryHead,
                      decode_boxes, extract_peaks)
from .metrics import (MetricReport, TPErrors, average_precision, evaluate,
                      match_detections, nds, tp_errors)

__version__ = "0.1.0"
