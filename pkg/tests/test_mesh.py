import numpy as np
import pytest

from presstopo.mesh import LOCAL_NODE_COORDS, ActiveSets, GridMesh, build_mesh


class TestGridMesh:
    def test_counts_2x2(self):
        mesh, dofs = build_mesh(2, 2)
        assert (mesh.nel, mesh.nno) == (4, 9)
        assert dofs.bnode.size == 3

    @pytest.mark.parametrize("nelx,nely", [(0, 1), (1, 0), (-2, 3), (1.5, 2), (True, 2)])
    def test_rejects_bad_dimensions(self, nelx, nely):
        with pytest.raises(ValueError):
            GridMesh(nelx, nely)

    def test_shape_is_rows_by_columns(self):
        assert GridMesh(5, 3).shape == (3, 5)


class TestNumbering:
    def test_single_element_uses_all_four_nodes(self):
        _, dofs = build_mesh(1, 1)
        assert sorted(dofs.p_dofs[0]) == [0, 1, 2, 3]

    def test_3x2_hand_enumeration(self):
        # Node grid of a 3x2 mesh, row 0 on top, numbered down each column:
        #   0 3 6  9
        #   1 4 7 10
        #   2 5 8 11
        _, dofs = build_mesh(3, 2)
        expected_grid = np.array([[0, 3, 6, 9], [1, 4, 7, 10], [2, 5, 8, 11]])
        np.testing.assert_array_equal(dofs.node_grid, expected_grid)
        e = dofs.elem_grid[0, 1]
        assert e == 2
        # Counterclockwise from bottom-left: BL, BR, TR, TL.
        np.testing.assert_array_equal(dofs.p_dofs[e], [4, 7, 6, 3])
        np.testing.assert_array_equal(dofs.u_dofs[e], [8, 9, 14, 15, 12, 13, 6, 7])
        # In 1-based terms the nodes lie inside {4, ..., 9}.
        assert set(dofs.p_dofs[e] + 1) <= set(range(4, 10))

    def test_element_index_is_column_major(self):
        _, dofs = build_mesh(4, 3)
        for c in range(4):
            for r in range(3):
                assert dofs.elem_grid[r, c] == c * 3 + r

    def test_local_order_matches_coordinates(self):
        _, dofs = build_mesh(3, 2)
        xy = dofs.node_coords()
        for e in range(6):
            rel = xy[dofs.p_dofs[e]] - xy[dofs.p_dofs[e, 0]]
            np.testing.assert_array_equal(rel, LOCAL_NODE_COORDS)

    def test_edges(self):
        _, dofs = build_mesh(3, 2)
        np.testing.assert_array_equal(dofs.lnode, [0, 1, 2])
        np.testing.assert_array_equal(dofs.rnode, [9, 10, 11])
        np.testing.assert_array_equal(dofs.tnode, [0, 3, 6, 9])
        np.testing.assert_array_equal(dofs.bnode, [2, 5, 8, 11])
        xy = dofs.node_coords()
        assert np.all(xy[dofs.bnode, 1] == 0) and np.all(xy[dofs.tnode, 1] == 2)

    @pytest.mark.parametrize("nelx,nely", [(1, 1), (3, 2), (5, 4), (7, 1)])
    def test_edge_sizes(self, nelx, nely):
        _, dofs = build_mesh(nelx, nely)
        assert dofs.bnode.size == dofs.tnode.size == nelx + 1
        assert dofs.lnode.size == dofs.rnode.size == nely + 1

    @pytest.mark.parametrize("nelx,nely", [(2, 2), (4, 3), (6, 5)])
    def test_node_valence(self, nelx, nely):
        _, dofs = build_mesh(nelx, nely)
        counts = np.bincount(dofs.p_dofs.ravel(), minlength=dofs.mesh.nno)
        corners = {dofs.node_grid[0, 0], dofs.node_grid[0, -1], dofs.node_grid[-1, 0], dofs.node_grid[-1, -1]}
        boundary = set(np.concatenate([dofs.lnode, dofs.rnode, dofs.tnode, dofs.bnode]))
        for n in range(dofs.mesh.nno):
            expected = 1 if n in corners else 2 if n in boundary else 4
            assert counts[n] == expected

    def test_dof_unions_cover_everything(self):
        _, dofs = build_mesh(4, 3)
        np.testing.assert_array_equal(np.unique(dofs.p_dofs), dofs.all_p_dofs)
        np.testing.assert_array_equal(np.unique(dofs.u_dofs), dofs.all_u_dofs)
        for row in dofs.p_dofs:
            assert np.unique(row).size == 4

    def test_displacement_dof_pairs(self):
        _, dofs = build_mesh(3, 3)
        np.testing.assert_array_equal(dofs.u_dofs[:, 0::2], 2 * dofs.p_dofs)
        np.testing.assert_array_equal(dofs.u_dofs[:, 1::2], 2 * dofs.p_dofs + 1)

    def test_maps_are_read_only(self):
        _, dofs = build_mesh(2, 2)
        with pytest.raises(ValueError):
            dofs.p_dofs[0, 0] = 5


class TestActiveSets:
    def test_partition(self):
        a = ActiveSets.from_non_design(10, nds=[1, 2], ndv=[5])
        np.testing.assert_array_equal(a.act, [0, 3, 4, 6, 7, 8, 9])
        union = np.concatenate([a.nds, a.ndv, a.act])
        np.testing.assert_array_equal(np.sort(union), np.arange(10))

    def test_overlap_rejected(self):
        with pytest.raises(ValueError, match="overlap"):
            ActiveSets.from_non_design(10, nds=[1, 2], ndv=[2])

    def test_out_of_range_rejected(self):
        with pytest.raises(ValueError):
            ActiveSets.from_non_design(4, nds=[4])

    def test_no_design_left(self):
        with pytest.raises(ValueError):
            ActiveSets.from_non_design(2, nds=[0], ndv=[1])

    def test_equality(self):
        assert ActiveSets.from_non_design(5, [0]) == ActiveSets.from_non_design(5, [0])
        assert ActiveSets.from_non_design(5, [0]) != ActiveSets.from_non_design(5, [1])
