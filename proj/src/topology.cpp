#include "edgefm/topology.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <queue>
#include <set>

#include "edgefm/error.hpp"

namespace edgefm {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

struct Dijkstra {
  std::vector<double> dist;
  std::vector<std::size_t> via_link;
  std::vector<NodeId> prev;
};

Dijkstra run_dijkstra(const NetworkGraph& g, NodeId src, double payload) {
  const std::size_t n = g.node_count();
  Dijkstra d{std::vector<double>(n, kInf), std::vector<std::size_t>(n, 0),
             std::vector<NodeId>(n, n)};
  using Item = std::pair<double, NodeId>;
  std::priority_queue<Item, std::vector<Item>, std::greater<>> pq;
  d.dist[src] = 0.0;
  pq.emplace(0.0, src);
  while (!pq.empty()) {
    auto [du, u] = pq.top();
    pq.pop();
    if (du > d.dist[u]) continue;
    for (const auto& adj : g.adjacent(u)) {
      const Link& l = g.links()[adj.link];
      double w = payload / l.bandwidth + l.distance / g.propagation_speed();
      double nd = du + w;
      if (nd < d.dist[adj.node]) {
        d.dist[adj.node] = nd;
        d.prev[adj.node] = u;
        d.via_link[adj.node] = adj.link;
        pq.emplace(nd, adj.node);
      }
    }
  }
  return d;
}

}  // namespace

std::string to_string(NodeKind k) {
  return k == NodeKind::EdgeServer ? "edge_server" : "edge_device";
}

NodeKind node_kind_from_string(const std::string& s) {
  if (s == "edge_server") return NodeKind::EdgeServer;
  if (s == "edge_device") return NodeKind::EdgeDevice;
  throw InvalidArgument("unknown node kind '" + s + "'");
}

NetworkGraph::NetworkGraph(std::vector<std::string> resources, std::vector<Node> nodes,
                           std::vector<Link> links, std::vector<User> users,
                           double propagation_speed)
    : resources_(std::move(resources)),
      nodes_(std::move(nodes)),
      links_(std::move(links)),
      users_(std::move(users)),
      speed_(propagation_speed) {
  if (!(speed_ > 0) || !std::isfinite(speed_))
    throw InvalidArgument("propagation speed must be positive");
  std::set<std::string> ids;
  for (const auto& node : nodes_) {
    if (!ids.insert(node.id).second) throw InvalidArgument("duplicate node id " + node.id);
    if (node.capacity.size() != resources_.size())
      throw InvalidArgument("node " + node.id + " capacity length mismatch");
    for (double c : node.capacity)
      if (!(c >= 0) || !std::isfinite(c))
        throw InvalidArgument("node " + node.id + " has invalid capacity");
  }
  adjacency_.assign(nodes_.size(), {});
  std::set<std::pair<NodeId, NodeId>> pairs;
  for (std::size_t i = 0; i < links_.size(); ++i) {
    const Link& l = links_[i];
    if (l.a >= nodes_.size() || l.b >= nodes_.size() || l.a == l.b)
      throw InvalidArgument("link " + std::to_string(i) + " has invalid endpoints");
    if (!pairs.insert(std::minmax(l.a, l.b)).second)
      throw InvalidArgument("link " + std::to_string(i) + " duplicates an earlier link");
    if (!(l.bandwidth > 0) || !std::isfinite(l.bandwidth))
      throw InvalidArgument("link " + std::to_string(i) + " bandwidth must be positive");
    if (!(l.distance >= 0) || !std::isfinite(l.distance))
      throw InvalidArgument("link " + std::to_string(i) + " distance must be non-negative");
    adjacency_[l.a].push_back({l.b, i});
    adjacency_[l.b].push_back({l.a, i});
  }
  std::set<std::string> uids;
  for (const auto& u : users_) {
    if (!uids.insert(u.id).second) throw InvalidArgument("duplicate user id " + u.id);
    if (u.attached >= nodes_.size())
      throw InvalidArgument("user " + u.id + " attached to unknown node");
    if (nodes_[u.attached].kind != NodeKind::EdgeDevice)
      throw InvalidArgument("user " + u.id + " must attach to an edge device");
    if (!(u.bandwidth > 0)) throw InvalidArgument("user " + u.id + " bandwidth must be positive");
    u.snr.validate();
  }
}

bool NetworkGraph::connected() const {
  if (nodes_.empty()) return true;
  std::vector<bool> seen(nodes_.size(), false);
  std::vector<NodeId> stack{0};
  seen[0] = true;
  std::size_t reached = 1;
  while (!stack.empty()) {
    NodeId v = stack.back();
    stack.pop_back();
    for (const auto& a : adjacency_[v])
      if (!seen[a.node]) {
        seen[a.node] = true;
        ++reached;
        stack.push_back(a.node);
      }
  }
  return reached == nodes_.size();
}

NodeId NetworkGraph::node_index(const std::string& id) const {
  for (std::size_t i = 0; i < nodes_.size(); ++i)
    if (nodes_[i].id == id) return i;
  throw InvalidArgument("unknown node id " + id);
}

Route shortest_latency_path(const NetworkGraph& g, NodeId src, NodeId dst, double payload) {
  if (src >= g.node_count() || dst >= g.node_count())
    throw InvalidArgument("route endpoint out of range");
  if (payload < 0) throw InvalidArgument("payload must be non-negative");
  Route r;
  if (src == dst) {
    r.nodes = {src};
    return r;
  }
  Dijkstra d = run_dijkstra(g, src, payload);
  if (d.dist[dst] == kInf)
    throw NoPathError("no path from " + g.node(src).id + " to " + g.node(dst).id);
  std::vector<NodeId> rev;
  for (NodeId v = dst; v != src; v = d.prev[v]) {
    rev.push_back(v);
    const Link& l = g.links()[d.via_link[v]];
    r.transmission += payload / l.bandwidth;
    r.propagation += l.distance / g.propagation_speed();
  }
  rev.push_back(src);
  r.nodes.assign(rev.rbegin(), rev.rend());
  return r;
}

std::vector<double> remaining_capacity(const NetworkGraph& g, NodeId v,
                                       std::span<const double> committed) {
  const auto& cap = g.node(v).capacity;
  if (committed.size() != cap.size())
    throw InvalidArgument("committed vector length mismatch");
  std::vector<double> out(cap.size());
  for (std::size_t k = 0; k < cap.size(); ++k) {
    out[k] = cap[k] - committed[k];
    if (out[k] < -1e-9)
      throw OverCommitError("node " + g.node(v).id + " over-committed on " +
                            g.resources()[k]);
    if (out[k] < 0) out[k] = 0;
  }
  return out;
}

TransferTable::TransferTable(const NetworkGraph& g, std::vector<double> payloads)
    : payloads_(std::move(payloads)) {
  const std::size_t n = g.node_count();
  tables_.reserve(payloads_.size());
  for (double p : payloads_) {
    Matrix<double> m(n, n, kInf);
    for (NodeId s = 0; s < n; ++s) {
      Dijkstra d = run_dijkstra(g, s, p);
      for (NodeId t = 0; t < n; ++t) m(s, t) = d.dist[t];
    }
    tables_.push_back(std::move(m));
  }
}

}  // namespace edgefm
