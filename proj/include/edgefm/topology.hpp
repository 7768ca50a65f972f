#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "edgefm/matrix.hpp"
#include "edgefm/stochastic.hpp"

namespace edgefm {

using NodeId = std::size_t;

enum class NodeKind { EdgeDevice, EdgeServer };

std::string to_string(NodeKind k);
NodeKind node_kind_from_string(const std::string& s);

struct Node {
  std::string id;
  NodeKind kind = NodeKind::EdgeDevice;
  std::vector<double> capacity;  // one entry per resource type

  bool operator==(const Node&) const = default;
};

// Undirected wired link. bandwidth in MB/ms, distance in km.
struct Link {
  NodeId a = 0;
  NodeId b = 0;
  double bandwidth = 1.0;
  double distance = 0.0;

  bool operator==(const Link&) const = default;
};

// Wireless user attached to an edge device. bandwidth in MB/ms per unit of
// spectral efficiency, snr is the fading power distribution.
struct User {
  std::string id;
  NodeId attached = 0;
  double bandwidth = 1.0;
  DistributionSpec snr;

  bool operator==(const User&) const = default;
};

class NetworkGraph {
 public:
  struct Adjacent {
    NodeId node;
    std::size_t link;
  };

  NetworkGraph() = default;
  // propagation_speed in km/ms. Throws InvalidArgument on malformed input.
  NetworkGraph(std::vector<std::string> resources, std::vector<Node> nodes,
               std::vector<Link> links, std::vector<User> users,
               double propagation_speed);

  const std::vector<std::string>& resources() const noexcept { return resources_; }
  const std::vector<Node>& nodes() const noexcept { return nodes_; }
  const std::vector<Link>& links() const noexcept { return links_; }
  const std::vector<User>& users() const noexcept { return users_; }
  double propagation_speed() const noexcept { return speed_; }

  std::size_t node_count() const noexcept { return nodes_.size(); }
  std::size_t resource_count() const noexcept { return resources_.size(); }
  const Node& node(NodeId v) const { return nodes_.at(v); }
  NodeId node_index(const std::string& id) const;
  const std::vector<Adjacent>& adjacent(NodeId v) const { return adjacency_.at(v); }
  // True when every node reaches every other; an empty graph counts as connected.
  bool connected() const;

  bool operator==(const NetworkGraph& o) const {
    return resources_ == o.resources_ && nodes_ == o.nodes_ && links_ == o.links_ &&
           users_ == o.users_ && speed_ == o.speed_;
  }

 private:
  std::vector<std::string> resources_;
  std::vector<Node> nodes_;
  std::vector<Link> links_;
  std::vector<User> users_;
  double speed_ = 200.0;
  std::vector<std::vector<Adjacent>> adjacency_;
};

struct Route {
  std::vector<NodeId> nodes;  // src first, dst last
  double transmission = 0.0;  // ms
  double propagation = 0.0;   // ms
  double latency() const { return transmission + propagation; }
};

// Minimum-latency route for a payload of the given size (MB). Edge weight is
// payload/bandwidth + distance/speed. Throws NoPathError.
Route shortest_latency_path(const NetworkGraph& g, NodeId src, NodeId dst, double payload);

// capacity(v) - committed, elementwise. Throws OverCommitError if any entry
// would go negative.
std::vector<double> remaining_capacity(const NetworkGraph& g, NodeId v,
                                       std::span<const double> committed);

// Precomputed all-pairs route latencies for a fixed list of payload sizes.
// Unreachable pairs hold +infinity.
class TransferTable {
 public:
  TransferTable() = default;
  TransferTable(const NetworkGraph& g, std::vector<double> payloads);

  double delay(std::size_t payload_index, NodeId from, NodeId to) const {
    return tables_[payload_index](from, to);
  }
  std::size_t payload_count() const noexcept { return payloads_.size(); }
  double payload(std::size_t i) const { return payloads_.at(i); }

 private:
  std::vector<double> payloads_;
  std::vector<Matrix<double>> tables_;
};

}  // namespace edgefm
