#pragma once

#include <functional>
#include <span>
#include <vector>

#include "edgefm/catalog.hpp"
#include "edgefm/topology.hpp"

namespace edgefm {

// All delays in ms; sizes in MB; rates and bandwidths in MB/ms.
double uplink_delay(double payload, double bandwidth, double snr);
double transmission_delay(double size, double bandwidth);
double propagation_delay(double distance, double speed);
double processing_delay(double workload, double rate);

struct Hop {
  NodeId node = 0;
  std::size_t stage = 0;
};

// One hop per stage, listed in an order compatible with the graph.
struct RoutingPath {
  std::vector<Hop> hops;
};

struct CompletionRecord {
  std::vector<double> completion;  // indexed by stage
  double end_to_end = 0.0;
};

// Wired transfer time for a payload between two nodes; zero when equal.
using TransferFn = std::function<double(NodeId from, NodeId to, double payload)>;

TransferFn route_transfer(const NetworkGraph& g);

// Completion-time recursion over an inverse tree. A root stage finishes at
// uplink + transfer(entry -> its node, input payload) + processing; any other
// stage finishes processing after the slowest parent output arrives.
// processing is indexed like path.hops.
CompletionRecord complete(const TaskDag& dag, const Catalog& catalog, const RoutingPath& path,
                          std::span<const double> processing, double uplink, NodeId entry,
                          double input_payload, const TransferFn& transfer);

CompletionRecord complete(const TaskDag& dag, const Catalog& catalog, const RoutingPath& path,
                          std::span<const double> processing, double uplink, NodeId entry,
                          double input_payload, const NetworkGraph& g);

}  // namespace edgefm
