"""Near-field IRS beamfocusing, codebook construction and beam training."""
from .errors import (ChecksumMismatchError, CodebookFileError, CodebookMismatchError,
                     DomainError)
from .geometry import (CoverageRegion, IrsPanel, Scene, default_region, default_scene,
                       element_positions, fraunhofer_distance, polar_to_point, region_point)
from .channel import PhaseProfile, array_gain, cascaded_channel, snr_db
from .control import SteeringTarget, beamfocus_profile, beamform_profile, quantize
from .analysis import CaiMap, PwaeRecord, cai, cai_map, pwae_map
from .codebook import (Codebook, Codeword, PointCloud, kmeans, load_codebook, nonuniform_3d,
                       sample_reference_points, save_codebook, uniform_2d, uniform_3d)
from .training import (SweepRecord, TrainingResult, experiment_fig6, experiment_hw_sim,
                       select_codeword, snr_sweep)
from .config import RunConfig

__version__ = "0.1.0"
