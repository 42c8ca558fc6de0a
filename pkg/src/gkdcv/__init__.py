"""Gabor low-energy block features classified with kernel discriminative common vectors."""

from .blocks import BlockConfig, FeatureVector, FusedImage, extract, fuse
from .classifier import Measure, Ranking, classify, classify_many, score
from .config import PipelineConfig
from .errors import GkdcvError
from .evaluation import ConfusionCounts, EvalReport, closed_set_eval, metrics, verification_eval
from .gabor import GaborParams, convolve, make_kernel, respond
from .image_io import GrayImage, load_image, load_manifest, resize
from .kdcv import KdcvModel, fit, project, project_many
from .kernels import KernelSpec
from .pipeline import Pipeline

__version__ = "0.1.0"
