from .scene import Scene, load_scene, save_scene, scene_from_dict, scene_to_dict
from .synth import SynthConfig, default_camera, generate_scene
from .pipeline import PipelineConfig, PipelineResult, run_pipeline, run_batch

__all__ = [
    "Scene", "load_scene", "save_scene", "scene_from_dict", "scene_to_dict",
    "SynthConfig", "default_camera", "generate_scene",
    "PipelineConfig", "PipelineResult", "run_pipeline", "run_batch",
]
