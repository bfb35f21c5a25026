"""The figure helpers save a readable PNG for each report table."""

from gsfuse import analysis
from gsfuse.fuse import MergeMethod
from gsfuse.plots import plot_spectrum, plot_trajectory, plot_verify
from gsfuse.synth import SynthSpec, random_adapter

PNG_MAGIC = b"\x89PNG\r\n\x1a\n"


def make_pair(seed):
    return (random_adapter(SynthSpec(n=8, b=2, sigma=0.1, seed=seed)),
            random_adapter(SynthSpec(n=8, b=2, sigma=0.1, seed=seed + 1)))


def assert_png(path):
    data = path.read_bytes()
    assert data[:8] == PNG_MAGIC
    assert len(data) > 1000


def test_spectrum_figure(tmp_path):
    rows = analysis.spectrum_table(make_pair(1)[0])
    out = tmp_path / "spectrum.png"
    plot_spectrum(rows, out)
    assert_png(out)


def test_trajectory_figure(tmp_path):
    A_C, A_S = make_pair(2)
    rows = analysis.trajectory_table(A_C, A_S, 11, method=MergeMethod.FULL)
    out = tmp_path / "trajectory.png"
    plot_trajectory(rows, out)
    assert_png(out)


def test_verify_figure_with_fits(tmp_path):
    results, fits = analysis.run_verify("all", sizes=(8,), seeds=(1,))
    out = tmp_path / "verify.png"
    plot_verify(results, fits, out)
    assert_png(out)


def test_verify_figure_checks_only(tmp_path):
    results, fits = analysis.run_verify("props", sizes=(8,), seeds=(1,))
    assert fits == {}
    out = tmp_path / "verify.png"
    plot_verify(results, fits, out)
    assert_png(out)
