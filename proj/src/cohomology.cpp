// This file is part of the igacoh project.
// SPDX-License-Identifier: Apache-2.0

#include "igacoh/cohomology.hpp"

#include <algorithm>
#include <deque>
#include <iostream>
#include <map>

namespace igacoh {

namespace {

/// BFS forest over a vertex subset with a given edge filter; deterministic
/// (adjacency sorted by neighbor id, roots in ascending id order).
SpanningTree bfs_forest(const CubicalComplex& cx, const std::vector<char>& vertex_in,
                        const std::vector<char>& edge_in, Index forced_root,
                        int* num_components) {
  const Index nv = cx.num_cells(0);
  SpanningTree t;
  t.parent_vertex.assign(static_cast<std::size_t>(nv), -1);
  t.parent_edge.assign(static_cast<std::size_t>(nv), -1);
  t.in_tree.assign(static_cast<std::size_t>(cx.num_cells(1)), 0);
  std::vector<char> seen(static_cast<std::size_t>(nv), 0);
  if (forced_root >= 0 && !vertex_in[static_cast<std::size_t>(forced_root)])
    throw ArgumentError("BFS root " + std::to_string(forced_root) +
                        " is not a vertex of the requested graph");
  int comps = 0;
  bool first = true;
  for (Index start = (forced_root >= 0 ? -1 : 0); start < nv; ++start) {
    const Index s = (start < 0) ? forced_root : start;
    if (!vertex_in[static_cast<std::size_t>(s)] || seen[static_cast<std::size_t>(s)])
      continue;
    if (first) t.root = s;
    first = false;
    ++comps;
    std::deque<Index> queue{s};
    seen[static_cast<std::size_t>(s)] = 1;
    t.bfs_order.push_back(s);
    while (!queue.empty()) {
      const Index v = queue.front();
      queue.pop_front();
      for (const auto& [w, e] : cx.vertex_nbrs[static_cast<std::size_t>(v)]) {
        if (!edge_in[static_cast<std::size_t>(e)] ||
            !vertex_in[static_cast<std::size_t>(w)] || seen[static_cast<std::size_t>(w)])
          continue;
        seen[static_cast<std::size_t>(w)] = 1;
        t.parent_vertex[static_cast<std::size_t>(w)] = v;
        t.parent_edge[static_cast<std::size_t>(w)] = e;
        t.in_tree[static_cast<std::size_t>(e)] = 1;
        ++t.num_tree_edges;
        t.bfs_order.push_back(w);
        queue.push_back(w);
      }
    }
  }
  if (num_components) *num_components = comps;
  return t;
}

}  // namespace

SpanningTree build_tree(const CubicalComplex& cx, Index root) {
  std::vector<char> all_v(static_cast<std::size_t>(cx.num_cells(0)), 1);
  std::vector<char> all_e(static_cast<std::size_t>(cx.num_cells(1)), 1);
  int comps = 0;
  SpanningTree t = bfs_forest(cx, all_v, all_e, root < 0 ? 0 : root, &comps);
  if (comps != 1)
    throw TopologyError("control mesh vertex-edge graph has " +
                        std::to_string(comps) + " components; expected 1");
  return t;
}

std::vector<SurfaceGenerator> surface_cohomology(const CubicalComplex& cx,
                                                 const InterfaceComplex& ic) {
  std::vector<SurfaceGenerator> out;
  const Index nse = static_cast<Index>(ic.edges.size());
  const Index nsq = static_cast<Index>(ic.quads.size());

  // edge -> (two incident surface quads) from B2s
  std::vector<std::array<Index, 2>> equads(static_cast<std::size_t>(nse), {-1, -1});
  for (Index q = 0; q < nsq; ++q)
    for (SpMatI::InnerIterator it(ic.B2s, q); it; ++it) {
      auto& eq = equads[static_cast<std::size_t>(it.row())];
      eq[static_cast<std::size_t>((eq[0] < 0) ? 0 : 1)] = q;
    }

  for (int comp = 0; comp < ic.num_components; ++comp) {
    // Primal spanning tree of the component's vertex-edge graph.
    std::vector<char> vin(static_cast<std::size_t>(cx.num_cells(0)), 0);
    std::vector<char> ein(static_cast<std::size_t>(cx.num_cells(1)), 0);
    std::vector<Index> comp_edges;
    for (Index le = 0; le < nse; ++le) {
      const Index q0 = equads[static_cast<std::size_t>(le)][0];
      if (ic.quad_component[static_cast<std::size_t>(q0)] != comp) continue;
      const Index ve = ic.edges[static_cast<std::size_t>(le)];
      comp_edges.push_back(le);
      ein[static_cast<std::size_t>(ve)] = 1;
      vin[static_cast<std::size_t>(cx.edge_vertices[static_cast<std::size_t>(ve)][0])] = 1;
      vin[static_cast<std::size_t>(cx.edge_vertices[static_cast<std::size_t>(ve)][1])] = 1;
    }
    int comps = 0;
    const SpanningTree ptree = bfs_forest(cx, vin, ein, -1, &comps);

    // Dual spanning tree over quads; arcs are non-tree surface edges.
    std::vector<char> dual_seen(static_cast<std::size_t>(nsq), 0);
    std::vector<char> edge_in_dual(static_cast<std::size_t>(nse), 0);
    std::vector<Index> leftover;
    {
      Index droot = -1;
      for (Index q = 0; q < nsq && droot < 0; ++q)
        if (ic.quad_component[static_cast<std::size_t>(q)] == comp) droot = q;
      std::deque<Index> queue{droot};
      dual_seen[static_cast<std::size_t>(droot)] = 1;
      while (!queue.empty()) {
        const Index q = queue.front();
        queue.pop_front();
        for (SpMatI::InnerIterator it(ic.B2s, q); it; ++it) {
          const Index le = static_cast<Index>(it.row());
          const Index ve = ic.edges[static_cast<std::size_t>(le)];
          if (ptree.in_tree[static_cast<std::size_t>(ve)]) continue;
          const Index other = (equads[static_cast<std::size_t>(le)][0] == q)
                                  ? equads[static_cast<std::size_t>(le)][1]
                                  : equads[static_cast<std::size_t>(le)][0];
          if (dual_seen[static_cast<std::size_t>(other)]) continue;
          dual_seen[static_cast<std::size_t>(other)] = 1;
          edge_in_dual[static_cast<std::size_t>(le)] = 1;
          queue.push_back(other);
        }
      }
      for (const Index le : comp_edges) {
        const Index ve = ic.edges[static_cast<std::size_t>(le)];
        if (!ptree.in_tree[static_cast<std::size_t>(ve)] &&
            !edge_in_dual[static_cast<std::size_t>(le)])
          leftover.push_back(le);
      }
    }

    // One cocycle per leftover edge: unit value there, propagated through the
    // dual tree by leaf elimination so that every face equation closes.
    for (const Index x : leftover) {
      std::vector<std::int64_t> theta(static_cast<std::size_t>(nse), 0);
      std::vector<char> unknown(static_cast<std::size_t>(nse), 0);
      std::vector<int> count(static_cast<std::size_t>(nsq), 0);
      theta[static_cast<std::size_t>(x)] = 1;
      for (const Index le : comp_edges)
        if (edge_in_dual[static_cast<std::size_t>(le)]) {
          unknown[static_cast<std::size_t>(le)] = 1;
          for (const Index q : equads[static_cast<std::size_t>(le)])
            count[static_cast<std::size_t>(q)] += 1;
        }
      std::deque<Index> ready;
      for (Index q = 0; q < nsq; ++q)
        if (ic.quad_component[static_cast<std::size_t>(q)] == comp &&
            count[static_cast<std::size_t>(q)] == 1)
          ready.push_back(q);
      while (!ready.empty()) {
        const Index q = ready.front();
        ready.pop_front();
        if (count[static_cast<std::size_t>(q)] != 1) continue;
        // face equation: sum over edges of B2s[e,q] theta[e] = 0
        Index ue = -1;
        int usign = 0;
        std::int64_t acc = 0;
        for (SpMatI::InnerIterator it(ic.B2s, q); it; ++it) {
          const Index le = static_cast<Index>(it.row());
          if (unknown[static_cast<std::size_t>(le)]) {
            ue = le;
            usign = static_cast<int>(it.value());
          } else {
            acc += static_cast<std::int64_t>(it.value()) *
                   theta[static_cast<std::size_t>(le)];
          }
        }
        theta[static_cast<std::size_t>(ue)] = -usign * acc;  // usign in {-1,1}
        unknown[static_cast<std::size_t>(ue)] = 0;
        for (const Index q2 : equads[static_cast<std::size_t>(ue)]) {
          count[static_cast<std::size_t>(q2)] -= 1;
          if (count[static_cast<std::size_t>(q2)] == 1) ready.push_back(q2);
        }
      }
      // Every face equation must now close (cocycle condition).
      for (Index q = 0; q < nsq; ++q) {
        if (ic.quad_component[static_cast<std::size_t>(q)] != comp) continue;
        std::int64_t acc = 0;
        for (SpMatI::InnerIterator it(ic.B2s, q); it; ++it)
          acc += static_cast<std::int64_t>(it.value()) *
                 theta[static_cast<std::size_t>(it.row())];
        if (acc != 0)
          throw TopologyError("surface cocycle propagation failed to close");
      }
      SurfaceGenerator g;
      g.component = comp;
      g.leftover_edge = ic.edges[static_cast<std::size_t>(x)];
      for (Index le = 0; le < nse; ++le)
        if (theta[static_cast<std::size_t>(le)] != 0)
          g.edge_values.emplace_back(ic.edges[static_cast<std::size_t>(le)],
                                     theta[static_cast<std::size_t>(le)]);
      out.push_back(std::move(g));
    }
  }
  return out;
}

std::vector<std::int64_t> thicken_to_current(const CubicalComplex& cx,
                                             const SurfaceGenerator& g) {
  // Extend by zero to all conductor edges, then apply the conductor curl.
  std::vector<std::int64_t> ghat(static_cast<std::size_t>(cx.num_cells(1)), 0);
  for (const auto& [e, v] : g.edge_values) ghat[static_cast<std::size_t>(e)] = v;

  std::vector<std::int64_t> j(static_cast<std::size_t>(cx.num_cells(2)), 0);
  for (Index q = 0; q < cx.num_cells(2); ++q) {
    if (!cx.touches_conductor[2][static_cast<std::size_t>(q)]) continue;
    std::int64_t acc = 0;
    for (SpMatI::InnerIterator it(cx.B2, q); it; ++it)
      acc += static_cast<std::int64_t>(it.value()) *
             ghat[static_cast<std::size_t>(it.row())];
    j[static_cast<std::size_t>(q)] = acc;
  }

  // Postconditions in exact arithmetic: zero interface trace, zero divergence.
  for (Index q = 0; q < cx.num_cells(2); ++q)
    if (cx.is_interface_quad(q) && j[static_cast<std::size_t>(q)] != 0)
      throw Error("thicken_to_current: nonzero interface trace (input is not a cocycle)");
  for (Index h = 0; h < cx.num_cells(3); ++h) {
    std::int64_t div = 0;
    for (SpMatI::InnerIterator it(cx.B3, h); it; ++it)
      div += static_cast<std::int64_t>(it.value()) *
             j[static_cast<std::size_t>(it.row())];
    if (div != 0) throw Error("thicken_to_current: nonzero divergence");
  }
  return j;
}

std::vector<std::int64_t> stt_solve(const CubicalComplex& cx,
                                    const SpanningTree& tree,
                                    const std::vector<std::int64_t>& j) {
  const Index ne = cx.num_cells(1);
  const Index nq = cx.num_cells(2);
  std::vector<std::int64_t> h(static_cast<std::size_t>(ne), 0);
  std::vector<char> unresolved(static_cast<std::size_t>(ne), 0);
  Index n_unresolved = 0;
  for (Index e = 0; e < ne; ++e)
    if (!tree.in_tree[static_cast<std::size_t>(e)]) {
      unresolved[static_cast<std::size_t>(e)] = 1;
      ++n_unresolved;
    }

  std::vector<int> count(static_cast<std::size_t>(nq), 0);
  for (Index q = 0; q < nq; ++q)
    for (SpMatI::InnerIterator it(cx.B2, q); it; ++it)
      if (unresolved[static_cast<std::size_t>(it.row())])
        count[static_cast<std::size_t>(q)] += 1;

  std::deque<Index> ready;
  for (Index q = 0; q < nq; ++q)
    if (count[static_cast<std::size_t>(q)] == 1) ready.push_back(q);

  while (!ready.empty()) {
    const Index q = ready.front();
    ready.pop_front();
    if (count[static_cast<std::size_t>(q)] != 1) continue;
    Index ue = -1;
    int usign = 0;
    std::int64_t acc = 0;
    for (SpMatI::InnerIterator it(cx.B2, q); it; ++it) {
      const Index e = static_cast<Index>(it.row());
      if (unresolved[static_cast<std::size_t>(e)]) {
        ue = e;
        usign = static_cast<int>(it.value());
      } else {
        acc += static_cast<std::int64_t>(it.value()) * h[static_cast<std::size_t>(e)];
      }
    }
    h[static_cast<std::size_t>(ue)] = usign * (j[static_cast<std::size_t>(q)] - acc);
    unresolved[static_cast<std::size_t>(ue)] = 0;
    --n_unresolved;
    for (const Index q2 : cx.edge_quads[static_cast<std::size_t>(ue)]) {
      count[static_cast<std::size_t>(q2)] -= 1;
      if (count[static_cast<std::size_t>(q2)] == 1) ready.push_back(q2);
    }
  }

  if (n_unresolved > 0)
    throw TopologyError(
        "spanning tree technique stalled with " + std::to_string(n_unresolved) +
        " unresolved cotree edges (pathological tree; retry with another root)");

  // Exact residual check over every quad.
  for (Index q = 0; q < nq; ++q) {
    std::int64_t acc = 0;
    for (SpMatI::InnerIterator it(cx.B2, q); it; ++it)
      acc += static_cast<std::int64_t>(it.value()) * h[static_cast<std::size_t>(it.row())];
    if (acc != j[static_cast<std::size_t>(q)])
      throw Error("stt_solve: residual is nonzero at quad " + std::to_string(q));
  }
  return h;
}

HarmonicGenerator restrict_and_lift(const CubicalComplex& cx,
                                    const std::vector<std::int64_t>& h,
                                    int provenance) {
  // Curl must vanish on every insulator quad before restriction.
  for (Index q = 0; q < cx.num_cells(2); ++q) {
    if (!cx.touches_insulator[2][static_cast<std::size_t>(q)]) continue;
    std::int64_t acc = 0;
    for (SpMatI::InnerIterator it(cx.B2, q); it; ++it)
      acc += static_cast<std::int64_t>(it.value()) * h[static_cast<std::size_t>(it.row())];
    if (acc != 0)
      throw Error("restrict_and_lift: nonzero curl on insulator quad " +
                  std::to_string(q));
  }

  std::vector<std::int64_t> hi(h);
  // Zero the values outside the insulator.
  for (Index e = 0; e < cx.num_cells(1); ++e)
    if (!cx.touches_insulator[1][static_cast<std::size_t>(e)])
      hi[static_cast<std::size_t>(e)] = 0;

  // The restriction of a volume cocycle to the domain boundary sphere is a
  // coboundary there; subtract that discrete gradient so the generator has
  // zero coefficients on Dirichlet boundary edges.
  bool boundary_hit = false;
  for (Index e = 0; e < cx.num_cells(1); ++e)
    if (cx.on_boundary[1][static_cast<std::size_t>(e)] &&
        hi[static_cast<std::size_t>(e)] != 0)
      boundary_hit = true;
  if (boundary_hit) {
    int comps = 0;
    const SpanningTree bt = bfs_forest(cx, cx.on_boundary[0], cx.on_boundary[1], -1, &comps);
    std::vector<std::int64_t> pot(static_cast<std::size_t>(cx.num_cells(0)), 0);
    for (const Index v : bt.bfs_order) {
      const Index pe = bt.parent_edge[static_cast<std::size_t>(v)];
      if (pe < 0) continue;
      const Index pv = bt.parent_vertex[static_cast<std::size_t>(v)];
      const auto ev = cx.edge_vertices[static_cast<std::size_t>(pe)];
      const int dir = (ev[0] == pv) ? 1 : -1;  // edge oriented lo->hi
      pot[static_cast<std::size_t>(v)] =
          pot[static_cast<std::size_t>(pv)] + dir * hi[static_cast<std::size_t>(pe)];
    }
    // consistency on the closed boundary (H^1 of a sphere is trivial)
    for (Index e = 0; e < cx.num_cells(1); ++e) {
      if (!cx.on_boundary[1][static_cast<std::size_t>(e)]) continue;
      const auto ev = cx.edge_vertices[static_cast<std::size_t>(e)];
      if (pot[static_cast<std::size_t>(ev[1])] - pot[static_cast<std::size_t>(ev[0])] !=
          hi[static_cast<std::size_t>(e)])
        throw TopologyError(
            "boundary restriction of a generator is not a discrete gradient");
    }
    // subtract the gradient on every edge touching the boundary potential
    for (Index e = 0; e < cx.num_cells(1); ++e) {
      const auto ev = cx.edge_vertices[static_cast<std::size_t>(e)];
      const std::int64_t dpot = pot[static_cast<std::size_t>(ev[1])] -
                                pot[static_cast<std::size_t>(ev[0])];
      if (dpot != 0 && cx.touches_insulator[1][static_cast<std::size_t>(e)])
        hi[static_cast<std::size_t>(e)] -= dpot;
    }
  }

  HarmonicGenerator out;
  out.provenance = provenance;
  for (Index e = 0; e < cx.num_cells(1); ++e) {
    const std::int64_t v = hi[static_cast<std::size_t>(e)];
    if (v == 0) continue;
    out.cochain.emplace_back(e, v);
    out.spline_coeffs.emplace_back(
        e, static_cast<double>(v) *
               static_cast<double>(cx.iso_sign[1][static_cast<std::size_t>(e)]));
  }
  out.support_size = static_cast<Index>(out.cochain.size());
  return out;
}

std::int64_t cycle_circulation(const CubicalComplex& cx, const SpanningTree& tree,
                               const std::vector<std::pair<Index, std::int64_t>>& cochain,
                               Index cotree_edge) {
  std::map<Index, std::int64_t> values(cochain.begin(), cochain.end());
  const auto value = [&](Index e) {
    auto it = values.find(e);
    return (it == values.end()) ? std::int64_t{0} : it->second;
  };
  const auto path_sum = [&](Index v) {
    std::int64_t acc = 0;
    while (tree.parent_edge[static_cast<std::size_t>(v)] >= 0) {
      const Index pe = tree.parent_edge[static_cast<std::size_t>(v)];
      const Index pv = tree.parent_vertex[static_cast<std::size_t>(v)];
      const auto ev = cx.edge_vertices[static_cast<std::size_t>(pe)];
      const int dir = (ev[0] == pv) ? 1 : -1;  // traversal pv -> v
      acc += dir * value(pe);
      v = pv;
    }
    return acc;
  };
  const auto ev = cx.edge_vertices[static_cast<std::size_t>(cotree_edge)];
  // cycle: root -> lo, edge lo->hi, hi -> root
  return path_sum(ev[0]) + value(cotree_edge) - path_sum(ev[1]);
}

CohomologyBasis filter_lazy(const CubicalComplex& cx,
                            std::vector<HarmonicGenerator> candidates) {
  CohomologyBasis basis;
  basis.candidate_count = static_cast<Index>(candidates.size());
  if (candidates.empty()) return basis;

  // Insulator spanning forest; fundamental cycles of its cotree span the
  // 1-cycles we pair against.
  int comps = 0;
  const SpanningTree itree =
      bfs_forest(cx, cx.touches_insulator[0], cx.touches_insulator[1], -1, &comps);

  std::vector<Index> cotree_edges;
  for (Index e = 0; e < cx.num_cells(1); ++e)
    if (cx.touches_insulator[1][static_cast<std::size_t>(e)] &&
        !itree.in_tree[static_cast<std::size_t>(e)])
      cotree_edges.push_back(e);

  // Circulations via tree potentials: O(V) per candidate.
  const Index nc = static_cast<Index>(candidates.size());
  Eigen::MatrixXd pairing(nc, static_cast<Index>(cotree_edges.size()));
  for (Index c = 0; c < nc; ++c) {
    std::vector<std::int64_t> dense(static_cast<std::size_t>(cx.num_cells(1)), 0);
    for (const auto& [e, v] : candidates[static_cast<std::size_t>(c)].cochain)
      dense[static_cast<std::size_t>(e)] = v;
    std::vector<std::int64_t> pot(static_cast<std::size_t>(cx.num_cells(0)), 0);
    for (const Index v : itree.bfs_order) {
      const Index pe = itree.parent_edge[static_cast<std::size_t>(v)];
      if (pe < 0) continue;
      const Index pv = itree.parent_vertex[static_cast<std::size_t>(v)];
      const auto ev = cx.edge_vertices[static_cast<std::size_t>(pe)];
      const int dir = (ev[0] == pv) ? 1 : -1;
      pot[static_cast<std::size_t>(v)] =
          pot[static_cast<std::size_t>(pv)] + dir * dense[static_cast<std::size_t>(pe)];
    }
    for (std::size_t ce = 0; ce < cotree_edges.size(); ++ce) {
      const auto ev = cx.edge_vertices[static_cast<std::size_t>(cotree_edges[ce])];
      pairing(c, static_cast<Index>(ce)) =
          static_cast<double>(pot[static_cast<std::size_t>(ev[0])] +
                              dense[static_cast<std::size_t>(cotree_edges[ce])] -
                              pot[static_cast<std::size_t>(ev[1])]);
    }
  }

  // Greedy rank-revealing selection in candidate order, pivot threshold 1e-8.
  std::vector<Eigen::VectorXd> reduced_rows;
  std::vector<Index> selected;
  for (Index c = 0; c < nc; ++c) {
    Eigen::VectorXd row = pairing.row(c);
    for (const Eigen::VectorXd& r : reduced_rows) {
      Index piv;
      r.cwiseAbs().maxCoeff(&piv);
      row -= (row[piv] / r[piv]) * r;
    }
    if (row.cwiseAbs().maxCoeff() > 1e-8) {
      reduced_rows.push_back(row);
      selected.push_back(c);
    }
  }

  const Index expected = basis.candidate_count / 2;
  if (static_cast<Index>(selected.size()) < expected) {
    basis.rank_deficient = true;
    std::cerr << "warning: selected " << selected.size()
              << " independent cohomology generators, expected " << expected << "\n";
  }
  for (const Index c : selected)
    basis.generators.push_back(std::move(candidates[static_cast<std::size_t>(c)]));
  return basis;
}

CohomologyBasis compute_cohomology_basis(const CubicalComplex& cx, Index tree_root) {
  const InterfaceComplex ic = extract_interface(cx);
  const std::vector<SurfaceGenerator> sgens = surface_cohomology(cx, ic);
  if (sgens.empty()) {
    CohomologyBasis empty;
    return empty;
  }
  const SpanningTree tree = build_tree(cx, tree_root);
  std::vector<HarmonicGenerator> candidates;
  candidates.reserve(sgens.size());
  for (std::size_t s = 0; s < sgens.size(); ++s) {
    const std::vector<std::int64_t> j = thicken_to_current(cx, sgens[s]);
    const std::vector<std::int64_t> h = stt_solve(cx, tree, j);
    candidates.push_back(restrict_and_lift(cx, h, static_cast<int>(s)));
  }
  return filter_lazy(cx, std::move(candidates));
}

}  // namespace igacoh
