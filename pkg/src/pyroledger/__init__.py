"""pyroledger: wildfire burn mapping, carbon emissions, and reversal-risk accounting.

The engine turns band rasters plus fire history into burn masks, fire
perimeters, carbon-stock and emissions estimates, risk-adjusted
sequestration for crediting, insurance figures, and Monte Carlo
uncertainty bands, all driven by a single JSON scenario config.
"""

__version__ = "0.1.0"

from .carbon import (EmissionsEstimate, SeverityLevel, SeverityTable,
                     VegetationClass, agb_from_ndvi, carbon_delta,
                     carbon_stock_map, fire_emissions,
                     fire_emissions_from_delta, severity_of)
from .fire import (BurnMask, FirePerimeter, classify_burn, extract_perimeters,
                   ingest_mask, mask_to_grid)
from .insurance import (Policy, ReportingPattern, estimate_ibnr,
                        price_premium, screen_exposure)
from .pipeline import (StageError, compute_digest, render_report,
                       report_value, run_pipeline)
from .raster import (GridPair, RasterGrid, compute_dnbr, compute_index,
                     parse_grid, read_grid, serialize_grid, write_grid)
from .risk import (BufferPool, FireEvent, FireHistory, RiskAssessment, assess,
                   estimate_p_wildfire, simulate_buffer,
                   simulate_buffer_replicates)
from .scenario import (Finding, Scenario, ScenarioError,
                       ScenarioValidationError, load_scenario,
                       validate_scenario)
from .seeding import derive_seed, replicate_rng
from .uncertainty import (DistributionSpec, MonteCarloSummary, evpi,
                          propagate, sensitivity, summarize)
