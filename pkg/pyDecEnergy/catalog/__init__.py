from .FeatureDefinition import FeatureDefinition
from .FeatureCatalog import FeatureCatalog, build_catalog, phi_vector, project_counts
