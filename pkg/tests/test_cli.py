import pytest

from qmcpricing.cli import main


def run(capsys, *argv):
    code = main(list(argv))
    out = capsys.readouterr()
    return code, out.out, out.err


class TestExitCodes:
    def test_selftest(self, capsys):
        code, out, _ = run(capsys, "selftest")
        assert code == 0
        assert "FAIL" not in out and out.count("PASS") >= 8

    def test_domain_error(self, capsys, tmp_path):
        cfg = tmp_path / "bad.ini"
        cfg.write_text("[market]\nvol = -1\n")
        code, _, err = run(capsys, "mc", "--config", str(cfg))
        assert code == 1 and "error" in err

    def test_resource_error(self, capsys, tmp_path):
        cfg = tmp_path / "big.ini"
        cfg.write_text("[qae]\nphase_bits = 16\n")
        code, _, err = run(capsys, "price-euro", "--config", str(cfg), "--out", str(tmp_path))
        assert code == 2 and "resource" in err

    @pytest.mark.parametrize(
        "argv",
        [["bogus"], ["mc", "--nope"], ["mc", "--seed", "-1"], ["mc", "--format", "json"], []],
    )
    def test_usage(self, capsys, argv):
        with pytest.raises(SystemExit) as exc:
            main(argv)
        capsys.readouterr()
        assert exc.value.code == 64


class TestCommands:
    def test_price_euro(self, capsys, tmp_path):
        code, out, _ = run(capsys, "price-euro", "--out", str(tmp_path))
        assert code == 0
        for key in ("pi_hat=", "pi_analytic=", "eps_bound=", "nu_est=", "k_q=24552"):
            assert key in out
        assert (tmp_path / "trace.csv").read_text().startswith("run_id,n,m,D,k_q,")

    def test_price_asian(self, capsys, tmp_path):
        code, _, _ = run(capsys, "price-asian", "--out", str(tmp_path))
        assert code == 0
        header = (tmp_path / "trace_asian.csv").read_text().splitlines()[0]
        assert header.endswith(",L,m_per_period,kind")

    def test_mc_and_qae(self, capsys):
        code, out, _ = run(capsys, "mc", "--samples", "1000", "--seed", "3")
        assert code == 0 and "mc_price=" in out
        code, out, _ = run(capsys, "qae", "--t", "64")
        assert code == 0 and "mu_hat=" in out

    def test_seed_changes_output(self, capsys):
        _, a, _ = run(capsys, "mc", "--samples", "1000", "--seed", "1")
        _, b, _ = run(capsys, "mc", "--samples", "1000", "--seed", "2")
        _, c, _ = run(capsys, "mc", "--samples", "1000", "--seed", "1")
        assert a != b and a == c

    def test_figures(self, capsys, small_config, tmp_path):
        for fig in ("fig1", "fig2", "fig3"):
            code, _, _ = run(capsys, fig, "--config", str(small_config), "--out", str(tmp_path))
            assert code == 0
            assert (tmp_path / f"{fig}.csv").stat().st_size > 0
            assert (tmp_path / f"{fig}.png").read_bytes()[:8] == b"\x89PNG\r\n\x1a\n"

    def test_fig2_byte_identical(self, capsys, small_config, tmp_path):
        a, b = tmp_path / "a", tmp_path / "b"
        for out in (a, b):
            assert run(capsys, "fig2", "--config", str(small_config), "--seed", "7", "--out", str(out))[0] == 0
        assert (a / "fig2.csv").read_bytes() == (b / "fig2.csv").read_bytes()
        assert (a / "fig2.png").read_bytes() == (b / "fig2.png").read_bytes()
