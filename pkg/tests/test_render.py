import numpy as np
import pytest

from ringsketch.camera import (
    CameraPose,
    dh_camera_poses,
    ring_camera_poses,
    ring_elevation,
    thp_camera_poses,
)
from ringsketch.mesh_io import Mesh, normalize_to_box, rotate_about_axis
from ringsketch.render import (
    BACKGROUND_GREY,
    RenderConfig,
    RingSet,
    ViewImage,
    render_rings,
    render_shaded,
    render_silhouette,
)
from ringsketch.synth import box, creature, uv_sphere

FOCAL = 1.0 / np.tan(np.deg2rad(45.0) / 2.0)


def pixel_centers_ndc(resolution):
    """NDC coordinates of all pixel centers as (ndc_x, ndc_y) grids."""
    half = resolution / 2.0
    c = (np.arange(resolution) + 0.5) / half - 1.0
    ndc_x = np.broadcast_to(c[None, :], (resolution, resolution))
    ndc_y = np.broadcast_to(-c[:, None], (resolution, resolution))
    return ndc_x, ndc_y


def count_components_4(mask):
    """Number of 4-connected True components (plain BFS)."""
    seen = np.zeros_like(mask, dtype=bool)
    h, w = mask.shape
    count = 0
    for sy, sx in zip(*np.nonzero(mask)):
        if seen[sy, sx]:
            continue
        count += 1
        stack = [(sy, sx)]
        seen[sy, sx] = True
        while stack:
            y, x = stack.pop()
            for ny, nx in ((y - 1, x), (y + 1, x), (y, x - 1), (y, x + 1)):
                if 0 <= ny < h and 0 <= nx < w and mask[ny, nx] and not seen[ny, nx]:
                    seen[ny, nx] = True
                    stack.append((ny, nx))
    return count


class TestRingPoses:
    def test_count_84(self):
        assert len(ring_camera_poses(3.0)) == 84

    def test_equator_azimuth0_position(self):
        poses = [p for p in ring_camera_poses(3.0) if p.ring_index == 3 and p.azimuth_index == 0]
        np.testing.assert_allclose(poses[0].position, [3.0, 0, 0], atol=1e-12)

    def test_ring0_is_bottom_pole(self):
        assert ring_elevation(0) == -90.0
        p = ring_camera_poses(3.0)[0]
        np.testing.assert_allclose(p.position, [0, 0, -3.0], atol=1e-9)
        np.testing.assert_allclose(p.up, [1, 0, 0])

    def test_all_on_sphere_of_radius_d(self):
        for p in ring_camera_poses(2.5):
            assert abs(np.linalg.norm(p.position) - 2.5) < 1e-9

    def test_azimuths_30_degree_steps(self):
        ring3 = [p for p in ring_camera_poses(3.0) if p.ring_index == 3]
        angles = [np.degrees(np.arctan2(p.position[1], p.position[0])) % 360 for p in ring3]
        np.testing.assert_allclose(angles, np.arange(12) * 30.0, atol=1e-9)

    def test_bad_distance(self):
        with pytest.raises(ValueError):
            ring_camera_poses(0.0)


class TestThpPoses:
    def test_count_48(self):
        assert len(thp_camera_poses(3.0)) == 48

    def test_setup_a_view0(self):
        p = thp_camera_poses(3.0)[0]
        assert p.ring_index == 0 and p.azimuth_index == 0
        np.testing.assert_allclose(p.position, [3.0, 0, 0], atol=1e-12)
        assert abs(p.position[2]) < 1e-12  # elevation 0

    def test_setup_b_all_at_30_elevation(self):
        for p in thp_camera_poses(3.0):
            if p.ring_index == 1:
                elev = np.degrees(np.arcsin(p.position[2] / np.linalg.norm(p.position)))
                assert abs(elev - 30.0) < 1e-9

    def test_setup_c_on_oyz_plane(self):
        for p in thp_camera_poses(3.0):
            if p.ring_index == 2:
                assert abs(p.position[0]) < 1e-12
                np.testing.assert_allclose(p.up, [1, 0, 0])

    def test_four_setups_of_12(self):
        poses = thp_camera_poses(3.0)
        for s in range(4):
            assert sum(1 for p in poses if p.ring_index == s) == 12


class TestDhPoses:
    def test_count_21(self):
        assert len(dh_camera_poses(3.0)) == 21

    def test_three_rings_of_seven(self):
        poses = dh_camera_poses(3.0)
        assert sorted({p.ring_index for p in poses}) == [2, 3, 4]
        for k in (2, 3, 4):
            assert sum(1 for p in poses if p.ring_index == k) == 7


class TestCameraPoseValidation:
    def test_position_equal_target_rejected(self):
        with pytest.raises(ValueError):
            CameraPose(np.zeros(3), np.zeros(3), np.array([0, 0, 1.0]), 0, 0)

    def test_up_parallel_to_view_rejected(self):
        with pytest.raises(ValueError):
            CameraPose(np.array([0, 0, 3.0]), np.zeros(3), np.array([0, 0, 1.0]), 0, 0)


EQ_POSE = ring_camera_poses(3.0, rings=[3])[0]


class TestRasterizer:
    def test_empty_mesh_uniform_grey(self):
        m = Mesh(np.eye(3), np.zeros((0, 3), dtype=np.int32))
        img = render_shaded(m, EQ_POSE, 32)
        assert (img.pixels == BACKGROUND_GREY).all()

    def test_empty_mesh_silhouette_zero(self):
        m = Mesh(np.eye(3), np.zeros((0, 3), dtype=np.int32))
        img = render_silhouette(m, EQ_POSE, 32)
        assert (img.pixels == 0).all()

    def test_deterministic(self):
        m = normalize_to_box(creature(1))
        a = render_shaded(m, EQ_POSE, 64)
        b = render_shaded(m, EQ_POSE, 64)
        np.testing.assert_array_equal(a.pixels, b.pixels)

    def test_silhouette_matches_shaded_foreground_exactly(self):
        m = normalize_to_box(creature(2))
        sh = render_shaded(m, EQ_POSE, 96)
        si = render_silhouette(m, EQ_POSE, 96)
        np.testing.assert_array_equal(si.pixels == 255, sh.pixels != BACKGROUND_GREY)

    def test_sphere_silhouette_area_analytic(self):
        m = uv_sphere(1.0, segments=32, stacks=24)
        res = 224
        img = render_silhouette(m, EQ_POSE, res)
        got = int((img.pixels == 255).sum())
        # perspective silhouette of a sphere: circle of NDC radius
        # focal * tan(asin(rho / d))
        r_ndc = FOCAL * np.tan(np.arcsin(1.0 / 3.0))
        nx, ny = pixel_centers_ndc(res)
        expect = int((nx**2 + ny**2 <= r_ndc**2).sum())
        assert abs(got - expect) <= 0.03 * expect

    def test_cube_face_on_coverage_analytic(self):
        b = 0.8
        m = box((2 * b, 2 * b, 2 * b))
        res = 64
        img = render_shaded(m, EQ_POSE, res)
        got = int((img.pixels != BACKGROUND_GREY).sum())
        # face-on view: the silhouette is the front face, a square of NDC
        # half-extent focal * b / (d - b)
        half = FOCAL * b / (3.0 - b)
        nx, ny = pixel_centers_ndc(res)
        expect = int(((np.abs(nx) <= half) & (np.abs(ny) <= half)).sum())
        assert expect > 0
        assert abs(got - expect) <= 0.02 * expect

    def test_convex_silhouette_single_component(self):
        m = uv_sphere(1.0, segments=16, stacks=12)
        for pose in ring_camera_poses(3.0, rings=[2])[:3]:
            img = render_silhouette(m, pose, 64)
            assert count_components_4(img.pixels == 255) == 1

    def test_pole_view_renders(self):
        m = normalize_to_box(creature(3))
        pose = ring_camera_poses(3.0, rings=[0])[0]
        img = render_shaded(m, pose, 64)
        assert (img.pixels != BACKGROUND_GREY).any()

    def test_sphere_headlight_bright_center_dark_rim(self):
        m = uv_sphere(1.0, segments=32, stacks=24)
        img = render_shaded(m, EQ_POSE, 128).pixels.astype(int)
        center = img[64, 64]
        assert center > 200
        # rim pixels are face-on to nothing: intensity falls toward edges
        row = img[64]
        fg = np.nonzero(row != BACKGROUND_GREY)[0]
        assert row[fg[0]] < center and row[fg[-1]] < center

    def test_mesh_rotation_permutes_equator_ring(self):
        m = normalize_to_box(creature(0))
        rotated = rotate_about_axis(m, "Z", 30.0)
        cfg = RenderConfig(rings=(3,), resolution=64)
        orig = [img.pixels for _, img in render_rings(m, cfg).rings[3]]
        rot = [img.pixels for _, img in render_rings(rotated, cfg).rings[3]]
        for j in range(12):
            agree = (rot[j] == orig[(j - 1) % 12]).mean()
            assert agree >= 0.99, f"view {j}: agreement {agree:.4f}"


class TestRenderRings:
    def test_default_config_36_images(self):
        m = normalize_to_box(creature(4))
        rs = render_rings(m, RenderConfig(resolution=32))
        assert rs.view_count() == 36
        assert sorted(rs.rings) == [2, 3, 4]

    def test_single_ring_12_images(self):
        m = normalize_to_box(creature(4))
        rs = render_rings(m, RenderConfig(rings=(3,), resolution=32))
        assert rs.view_count() == 12

    def test_images_ordered_by_azimuth(self):
        m = normalize_to_box(creature(4))
        rs = render_rings(m, RenderConfig(rings=(2,), resolution=32))
        assert [p.azimuth_index for p, _ in rs.rings[2]] == list(range(12))

    def test_resolution_floor(self):
        with pytest.raises(ValueError):
            RenderConfig(resolution=8)


class TestViewImageInvariants:
    def test_silhouette_must_be_binary(self):
        with pytest.raises(ValueError):
            ViewImage(np.full((4, 4), 7, dtype=np.uint8), kind="silhouette")

    def test_ringset_unequal_counts_rejected(self):
        img = ViewImage(np.zeros((4, 4), dtype=np.uint8))
        with pytest.raises(ValueError):
            RingSet("x", {0: [(EQ_POSE, img)], 1: []})
