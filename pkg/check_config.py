"""Configuration validation script - checks .env settings and a geometry."""
import sys
import os

# Set UTF-8 encoding for Windows console
if sys.platform == 'win32':
    os.environ['PYTHONIOENCODING'] = 'utf-8'

from pydantic import ValidationError

from cornerwaves.config.settings import get_settings
from cornerwaves.core.errors import CornerWavesError
from cornerwaves.ingest.geometry_loader import load_domain
from cornerwaves.meshing.generator import resolved_params
from cornerwaves.meshing.grading import GradingParams


def check_settings():
    """Load CORNER_WAVES_* settings and report each group."""
    print("=" * 60)
    print("corner-waves Settings Check")
    print("=" * 60)

    try:
        settings = get_settings()
    except ValidationError as e:
        print("[X] Settings failed validation:")
        for err in e.errors():
            field = ".".join(str(p) for p in err["loc"])
            print(f"    CORNER_WAVES_{field.upper()}: {err['msg']}")
        return False

    print(f"[OK] Output directory: {settings.out}")
    print(f"[OK] Threads: {settings.threads}")
    print(f"[OK] Linear solver: {settings.linear_solver} (tol {settings.solver_tol:g}, "
          f"max {settings.solver_maxiter} iterations)")
    print(f"[OK] DtN storage: {settings.schur_mode} (dense up to {settings.dense_limit} trace nodes)")
    print(f"[OK] Screening radius: {settings.screen_radius:g}")
    print(f"[OK] Minimum mesh angle: {settings.min_angle:g} deg")

    if settings.enable_database:
        db_dir = os.path.dirname(os.path.abspath(settings.db_file))
        if not os.access(db_dir, os.W_OK):
            print(f"[X] CORNER_WAVES_DB_FILE: directory {db_dir} is not writable")
            return False
        print(f"[OK] Run ledger: {settings.db_file}")
    else:
        print("[!] Run ledger is DISABLED (CORNER_WAVES_ENABLE_DATABASE=False)")
    return True


def check_geometry(source: str):
    """Load and validate one geometry argument, then resolve its grading."""
    print("\n" + "=" * 60)
    print(f"Geometry Check: {source[:60]}")
    print("=" * 60)
    try:
        spec = load_domain(source)
        grading = resolved_params(spec, GradingParams())
    except CornerWavesError as e:
        print(f"[X] {e}")
        return False

    print(f"[OK] {spec.name}: {len(spec.dirichlet_intervals)} surface components, "
          f"{len(spec.wetted_arcs)} objects, {len(spec.corners)} corners")
    for corner in spec.mixed_corners():
        print(f"     mixed corner at ({corner.x:g}, {corner.z:g}), angle {corner.angle:.4f} rad")
    print(f"[OK] Default grading: h0={grading['h0']:g}, rho0={grading['rho0']:g}, h_min={grading['h_min']:.3g}")
    return True


if __name__ == "__main__":
    try:
        success = check_settings()
        for arg in sys.argv[1:] or ["rectangle"]:
            success = check_geometry(arg) and success
        sys.exit(0 if success else 1)
    except Exception as e:
        print(f"\n[ERROR] Error checking configuration: {e}")
        import traceback
        traceback.print_exc()
        sys.exit(1)
