import numpy as np
import pytest

from ringsketch.errors import DegenerateMeshError, MeshError, ObjParseError
from ringsketch.mesh_io import (
    Aabb,
    Mesh,
    apply_reorientation,
    bounding_box,
    load_obj,
    normalize_to_box,
    parse_obj,
    rotate_about_axis,
    save_obj,
    serialize_obj,
)

TRI = Mesh(np.array([[0.0, 0, 0], [1, 0, 0], [0, 1, 0]]), np.array([[0, 1, 2]]), id="tri")


class TestParseObj:
    def test_minimal_triangle(self):
        obj = b"v 0 0 0\nv 1 0 0\nv 0 1 0\nf 1 2 3\n"
        m = parse_obj(obj)
        assert m.vertex_count == 3
        assert m.triangle_count == 1
        np.testing.assert_array_equal(m.triangles, [[0, 1, 2]])

    def test_quad_fan_triangulation(self):
        obj = b"v 0 0 0\nv 1 0 0\nv 1 1 0\nv 0 1 0\nf 1 2 3 4\n"
        m = parse_obj(obj)
        np.testing.assert_array_equal(m.triangles, [[0, 1, 2], [0, 2, 3]])

    def test_pentagon_fan(self):
        obj = b"\n".join(b"v %d 0 0" % i for i in range(5)) + b"\nf 1 2 3 4 5\n"
        m = parse_obj(obj)
        assert m.triangle_count == 3
        np.testing.assert_array_equal(m.triangles[:, 0], [0, 0, 0])

    def test_slash_indices_use_vertex_only(self):
        obj = b"v 0 0 0\nv 1 0 0\nv 0 1 0\nvt 0 0\nvn 0 0 1\nf 1/1/1 2/1/1 3/1/1\n"
        m = parse_obj(obj)
        np.testing.assert_array_equal(m.triangles, [[0, 1, 2]])

    def test_ignores_unknown_directives_and_comments(self):
        obj = b"# comment\no thing\ns off\nusemtl x\nv 0 0 0\nv 1 0 0\nv 0 1 0\nf 1 2 3\n"
        assert parse_obj(obj).triangle_count == 1

    def test_bad_vertex_reports_line(self):
        obj = b"v 0 0 0\nv nope 0 0\n"
        with pytest.raises(ObjParseError, match="line 2"):
            parse_obj(obj)

    def test_face_index_out_of_range(self):
        obj = b"v 0 0 0\nv 1 0 0\nv 0 1 0\nf 1 2 9\n"
        with pytest.raises(MeshError, match="exceeds vertex count"):
            parse_obj(obj)

    def test_face_index_zero_rejected(self):
        obj = b"v 0 0 0\nv 1 0 0\nv 0 1 0\nf 0 1 2\n"
        with pytest.raises(ObjParseError, match="1-based"):
            parse_obj(obj)

    def test_too_few_vertices(self):
        with pytest.raises(ObjParseError):
            parse_obj(b"v 0 0 0\nv 1 1 1\n")

    def test_vertex_missing_coordinate(self):
        with pytest.raises(ObjParseError, match="line 1"):
            parse_obj(b"v 0 0\nv 1 0 0\nv 0 1 0\n")

    def test_forward_face_reference_ok(self):
        # Face appears before its vertices; legal because validation runs
        # against the final vertex table.
        obj = b"f 1 2 3\nv 0 0 0\nv 1 0 0\nv 0 1 0\n"
        assert parse_obj(obj).triangle_count == 1


class TestRoundTrip:
    def test_save_load_exact(self, tmp_path):
        rng = np.random.default_rng(7)
        verts = rng.normal(size=(50, 3))
        tris = rng.integers(0, 50, size=(80, 3)).astype(np.int32)
        m = Mesh(verts, tris, id="rand")
        p = tmp_path / "rand.obj"
        save_obj(m, p)
        back = load_obj(p)
        assert back.id == "rand"
        np.testing.assert_array_equal(back.vertices, m.vertices)
        np.testing.assert_array_equal(back.triangles, m.triangles)

    def test_serialize_is_ascii(self):
        serialize_obj(TRI).decode("ascii")


class TestMeshValidation:
    def test_rejects_nan(self):
        with pytest.raises(MeshError, match="NaN"):
            Mesh(np.array([[0.0, 0, 0], [1, 0, 0], [np.nan, 1, 0]]), np.array([[0, 1, 2]]))

    def test_rejects_bad_index(self):
        with pytest.raises(MeshError, match="out of range"):
            Mesh(np.array([[0.0, 0, 0], [1, 0, 0], [0, 1, 0]]), np.array([[0, 1, 3]]))

    def test_rejects_too_few_vertices(self):
        with pytest.raises(MeshError):
            Mesh(np.array([[0.0, 0, 0]]), np.zeros((0, 3), dtype=np.int32))


class TestNormalize:
    def test_unit_box_centering(self):
        m = Mesh(np.array([[1.0, 1, 1], [3, 2, 1], [2, 1, 5]]), np.array([[0, 1, 2]]))
        n = normalize_to_box(m)
        box = bounding_box(n)
        np.testing.assert_allclose(box.center, [0, 0, 0], atol=1e-12)
        assert box.extents.max() == pytest.approx(2.0, abs=1e-12)

    def test_aspect_preserved(self):
        m = Mesh(np.array([[0.0, 0, 0], [4, 1, 0], [0, 1, 2]]), np.array([[0, 1, 2]]))
        before = bounding_box(m).extents
        after = bounding_box(normalize_to_box(m)).extents
        np.testing.assert_allclose(after / after.max(), before / before.max(), atol=1e-12)

    def test_idempotent(self):
        m = Mesh(np.random.default_rng(3).normal(size=(20, 3)), np.array([[0, 1, 2]]))
        once = normalize_to_box(m)
        twice = normalize_to_box(once)
        np.testing.assert_allclose(twice.vertices, once.vertices, atol=1e-9)

    def test_degenerate_rejected(self):
        m = Mesh(np.zeros((3, 3)), np.array([[0, 1, 2]]))
        with pytest.raises(DegenerateMeshError):
            normalize_to_box(m)


class TestRotation:
    def test_x_90_sends_y_to_z(self):
        m = Mesh(np.array([[0.0, 1, 0], [1, 0, 0], [0, 0, 1]]), np.array([[0, 1, 2]]))
        r = rotate_about_axis(m, "X", 90.0)
        np.testing.assert_allclose(r.vertices[0], [0, 0, 1], atol=1e-12)

    def test_z_90_sends_x_to_y(self):
        m = Mesh(np.array([[1.0, 0, 0], [0, 1, 0], [0, 0, 1]]), np.array([[0, 1, 2]]))
        r = rotate_about_axis(m, "Z", 90.0)
        np.testing.assert_allclose(r.vertices[0], [0, 1, 0], atol=1e-12)

    def test_preserves_distances(self):
        rng = np.random.default_rng(11)
        m = Mesh(rng.normal(size=(30, 3)), np.array([[0, 1, 2]]))
        r = rotate_about_axis(m, "Y", 37.5)
        d0 = np.linalg.norm(m.vertices[:, None] - m.vertices[None], axis=-1)
        d1 = np.linalg.norm(r.vertices[:, None] - r.vertices[None], axis=-1)
        np.testing.assert_allclose(d1, d0, atol=1e-9)

    def test_360_is_identity(self):
        m = Mesh(np.random.default_rng(5).normal(size=(10, 3)), np.array([[0, 1, 2]]))
        r = apply_reorientation(m, [("X", 90), ("X", 270)])
        np.testing.assert_allclose(r.vertices, m.vertices, atol=1e-9)

    def test_bad_axis(self):
        with pytest.raises(ValueError):
            rotate_about_axis(TRI, "W", 10)


class TestAabb:
    def test_min_le_max_enforced(self):
        with pytest.raises(MeshError):
            Aabb(np.array([1.0, 0, 0]), np.array([0.0, 1, 1]))

    def test_center_extents(self):
        b = Aabb(np.array([-1.0, 0, 2]), np.array([3.0, 4, 2]))
        np.testing.assert_allclose(b.center, [1, 2, 2])
        np.testing.assert_allclose(b.extents, [4, 4, 0])
