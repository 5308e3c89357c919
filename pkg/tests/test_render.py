import numpy as np
import pytest

from latticeflow.colorize import ColorScheme, builtin_palette, color_value
from latticeflow.expr import parse_expr
from latticeflow.lattice import UnimodularMatrix, flow, solve_periodic_orbit
from latticeflow.render import (
    Image,
    RenderJob,
    Viewport,
    render_animation,
    render_frame,
    sample_grid,
)

PALETTE = builtin_palette("cyclic-rainbow")
SCHEME = ColorScheme(contour_strength=0.4, pole_color=(1.0, 1.0, 1.0))
ORBIT = solve_periodic_orbit(UnimodularMatrix(2, 1, 1, 1))


def golden_job(**kw):
    defaults = dict(
        orbit=ORBIT,
        expr=parse_expr("P"),
        viewport=Viewport(0j, 2.0, 32, 32),
        palette=PALETTE,
        scheme=SCHEME,
        frames=4,
        seconds=2.0,
        output_dir=".",
        gif=False,
    )
    defaults.update(kw)
    return RenderJob(**defaults)


class TestViewport:
    def test_height_follows_aspect(self):
        vp = Viewport(0j, 3.0, 300, 100)
        assert vp.height == pytest.approx(1.0)

    def test_validation(self):
        with pytest.raises(ValueError):
            Viewport(0j, -1.0, 10, 10)
        with pytest.raises(ValueError):
            Viewport(0j, 1.0, 0, 10)
        with pytest.raises(ValueError):
            Viewport(0j, 1.0, 10, 10, supersample=0)

    def test_single_pixel_center(self):
        vp = Viewport(0.3 + 0.7j, 1.0, 1, 1)
        grid = sample_grid(vp)
        assert grid.shape == (1, 1)
        assert grid[0, 0] == pytest.approx(0.3 + 0.7j)

    def test_pixel_centers(self):
        vp = Viewport(0j, 2.0, 2, 2)
        grid = sample_grid(vp)
        # top-left pixel center is up-left of the viewport center
        assert grid[0, 0] == pytest.approx(-0.5 + 0.5j)
        assert grid[1, 1] == pytest.approx(0.5 - 0.5j)


class TestImage:
    def test_buffer_length_checked(self):
        with pytest.raises(ValueError):
            Image(2, 2, b"\x00" * 11)


class TestRenderFrame:
    def test_constant_expression(self):
        e = parse_expr("1")
        img = render_frame(e, ORBIT.lattice, Viewport(0j, 2.0, 8, 4), PALETTE, SCHEME)
        want = bytes(
            int(c * 255 + 0.5) for c in color_value(1.0, PALETTE, SCHEME)
        )
        assert img.pixels == want * 32

    def test_pole_pixel(self):
        # 1x1 viewport centered on the lattice point 0: wp has a double pole there
        img = render_frame(
            parse_expr("P"), ORBIT.lattice, Viewport(0j, 0.5, 1, 1), PALETTE, SCHEME
        )
        assert img.pixels == b"\xff\xff\xff"

    def test_repeat_render_identical(self):
        vp = Viewport(0.1 + 0.1j, 1.5, 24, 24, supersample=2)
        e = parse_expr("(P^2+1)/(P-3)")
        a = render_frame(e, ORBIT.lattice, vp, PALETTE, SCHEME)
        b = render_frame(e, ORBIT.lattice, vp, PALETTE, SCHEME)
        assert a.pixels == b.pixels

    def test_supersample_two_close_on_smooth_region(self):
        # contours off: the color map is then smooth away from poles, so
        # center sampling and 2x2 averaging should agree almost everywhere
        e = parse_expr("P")
        smooth = ColorScheme(pole_color=(1.0, 1.0, 1.0))
        base = Viewport(0.3 + 0.3j, 0.3, 32, 32, supersample=1)
        fine = Viewport(0.3 + 0.3j, 0.3, 32, 32, supersample=2)
        a = np.frombuffer(
            render_frame(e, ORBIT.lattice, base, PALETTE, smooth).pixels, np.uint8
        ).astype(int)
        b = np.frombuffer(
            render_frame(e, ORBIT.lattice, fine, PALETTE, smooth).pixels, np.uint8
        ).astype(int)
        assert np.mean(np.abs(a - b) <= 2) >= 0.99


class TestRenderAnimation:
    def test_frame_count_and_times(self):
        job = golden_job(frames=2)
        imgs = render_animation(job, threads=1)
        assert len(imgs) == 2
        assert job.frame_time(0) == 0.0
        assert job.frame_time(1) == ORBIT.t0 / 2

    def test_no_drift_at_midpoint(self):
        job = golden_job(frames=36)
        assert job.frame_time(18) == ORBIT.t0 / 2
        mid = flow(ORBIT.lattice, job.frame_time(18))
        direct = flow(ORBIT.lattice, ORBIT.t0 / 2)
        assert mid.omega1 == direct.omega1 and mid.omega2 == direct.omega2

    def test_thread_count_invariance(self):
        job = golden_job(frames=3)
        one = render_animation(job, threads=1)
        many = render_animation(job, threads=4)
        for a, b in zip(one, many):
            assert a.pixels == b.pixels

    def test_loop_closure_extra_frame(self):
        job = golden_job(frames=3, viewport=Viewport(0.1 + 0.05j, 1.2, 32, 32))
        first = render_animation(job, threads=1)[0]
        closed = render_frame(
            job.expr,
            flow(ORBIT.lattice, ORBIT.t0),
            job.viewport,
            job.palette,
            job.scheme,
        )
        a = np.frombuffer(first.pixels, np.uint8).astype(int)
        b = np.frombuffer(closed.pixels, np.uint8).astype(int)
        assert np.abs(a - b).max() <= 1

    def test_frames_validation(self):
        with pytest.raises(ValueError):
            golden_job(frames=1)
