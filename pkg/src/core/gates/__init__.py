from src.core.gates.bounds import bounded_domain_report, bounded_range_report, grid_slice_lipschitz
from src.core.gates.cw import build_cw_h, cw_pipeline, main_pipeline, rotation_reference, unit_ball
from src.core.gates.gate import check_majorizes_pi, extract_operator, hausdorff_inf, representability_gate, run_gate
