"""Line Space Clustering.

Samples are read as sequences over their feature indices and clustered with
K-medians under a blend of DTW and Euclidean distance.
"""

from .cluster import LscConfig, kmeans_fit, lsc_fit, update_centers
from .core import ClusterModel, DataError, DataMatrix, LineSeries, to_line_space, to_matrix
from .data import LabeledDataset, SyntheticSpec, generate_synthetic, load_csv, load_iris, load_wine
from .dtw import FastDtwSpec, dtw_exact, dtw_fast
from .evaluation import MetricReport, evaluate
from .metric import CombinedMetricSpec, combined_distance, euclidean
from .preprocess import SavGolSpec, savgol_kernel, smooth_line

__version__ = "0.1.0"
