import numpy as np
import pytest

DENSITY_HEADER = "t,rho1,rho2,rho3,rho4,n_active,n_s1,n_s2,n_s3,n_s4"
FRAME_HEADER = "id,group,status,x,y,is_leader"
SWEEP_HEADER = (
    "rank,plan,objective,mean_peak,mean_fluctuation,peak_s5,peak_s6,"
    "fluct_s5,fluct_s6,status"
)


@pytest.fixture
def densities_csv(tmp_path):
    """A small but well-formed densities.csv (8 samples)."""
    rng = np.random.default_rng(0)
    lines = [DENSITY_HEADER]
    for i in range(8):
        rho = rng.uniform(0.0, 2.0, size=4)
        lines.append(
            f"{float(i)},{rho[0]:.4f},{rho[1]:.4f},{rho[2]:.4f},{rho[3]:.4f},"
            f"{40 - i},{30 - i},4,3,3"
        )
    path = tmp_path / "densities.csv"
    path.write_text("\n".join(lines) + "\n")
    return path


@pytest.fixture
def frame_csv(tmp_path):
    """A frame with all four statuses present and two leaders."""
    lines = [FRAME_HEADER]
    rows = [
        (0, 0, 1, 5.0, 2.0, 1),
        (1, 0, 1, 5.5, 2.5, 0),
        (2, 1, 2, 20.0, 5.0, 1),
        (3, 1, 2, 20.5, 5.5, 0),
        (4, 2, 3, 40.0, 8.0, 0),
        (5, 3, 4, 60.0, 1.0, 0),
    ]
    for row in rows:
        lines.append(",".join(str(v) for v in row))
    path = tmp_path / "frame_000500.csv"
    path.write_text("\n".join(lines) + "\n")
    return path


@pytest.fixture
def sweep_csv(tmp_path):
    """A sweep over two positions x two times plus a baseline and a failure."""
    lines = [SWEEP_HEADER]
    rows = [
        (1, "30@10", 2.1, 2.1, 0.30, 2.0, 2.2, 0.3, 0.3, "ok"),
        (2, "30@20", 2.4, 2.4, 0.35, 2.3, 2.5, 0.35, 0.35, "ok"),
        (3, "10@10", 2.8, 2.8, 0.40, 2.7, 2.9, 0.4, 0.4, "ok"),
        (4, "none", 3.0, 3.0, 0.50, 2.9, 3.1, 0.5, 0.5, "ok"),
        (5, "10@20", "nan", "nan", "nan", "nan", "nan", "nan", "nan", "failed: seed 5: numeric blow-up"),
    ]
    for row in rows:
        lines.append(",".join(str(v) for v in row))
    path = tmp_path / "sweep.csv"
    path.write_text("\n".join(lines) + "\n")
    return path
