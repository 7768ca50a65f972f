#include "edgefm/latency.hpp"

#include <algorithm>
#include <cmath>

#include "edgefm/error.hpp"

namespace edgefm {

double uplink_delay(double payload, double bandwidth, double snr) {
  if (payload < 0) throw InvalidArgument("payload must be non-negative");
  double rate = bandwidth * std::log2(1.0 + snr);
  if (!(rate > 0) || !std::isfinite(rate))
    throw ZeroRateError("uplink rate is zero (bandwidth " + std::to_string(bandwidth) +
                        ", snr " + std::to_string(snr) + ")");
  return payload / rate;
}

double transmission_delay(double size, double bandwidth) {
  if (size < 0) throw InvalidArgument("size must be non-negative");
  if (!(bandwidth > 0)) throw ZeroRateError("link bandwidth is zero");
  return size / bandwidth;
}

double propagation_delay(double distance, double speed) {
  if (distance < 0) throw InvalidArgument("distance must be non-negative");
  if (!(speed > 0)) throw ZeroRateError("propagation speed is zero");
  return distance / speed;
}

double processing_delay(double workload, double rate) {
  if (workload < 0) throw InvalidArgument("workload must be non-negative");
  if (!(rate > 0)) throw ZeroRateError("processing rate is zero");
  return workload / rate;
}

TransferFn route_transfer(const NetworkGraph& g) {
  return [&g](NodeId from, NodeId to, double payload) {
    if (from == to) return 0.0;
    return shortest_latency_path(g, from, to, payload).latency();
  };
}

CompletionRecord complete(const TaskDag& dag, const Catalog& catalog, const RoutingPath& path,
                          std::span<const double> processing, double uplink, NodeId entry,
                          double input_payload, const TransferFn& transfer) {
  const std::size_t n = dag.size();
  if (path.hops.size() != n) throw InvalidArgument("path must have one hop per stage");
  if (processing.size() != n) throw InvalidArgument("processing must have one entry per hop");
  std::vector<NodeId> node(n);
  std::vector<bool> seen(n, false);
  for (const Hop& h : path.hops) {
    if (h.stage >= n || seen[h.stage]) throw InvalidArgument("path repeats or misses a stage");
    for (std::size_t p : dag.parents(h.stage))
      if (!seen[p]) throw InvalidArgument("path visits a stage before its parent");
    seen[h.stage] = true;
    node[h.stage] = h.node;
  }
  CompletionRecord rec;
  rec.completion.assign(n, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    const Hop& h = path.hops[i];
    if (processing[i] < 0) throw InvalidArgument("negative processing time");
    double ready = 0.0;
    if (dag.parents(h.stage).empty()) {
      ready = uplink + (entry == h.node ? 0.0 : transfer(entry, h.node, input_payload));
    } else {
      for (std::size_t p : dag.parents(h.stage)) {
        double out = catalog.ms(dag.ms(p)).output;
        double t = rec.completion[p] + (node[p] == h.node ? 0.0 : transfer(node[p], h.node, out));
        ready = std::max(ready, t);
      }
    }
    rec.completion[h.stage] = ready + processing[i];
  }
  rec.end_to_end = rec.completion[dag.sink()];
  return rec;
}

CompletionRecord complete(const TaskDag& dag, const Catalog& catalog, const RoutingPath& path,
                          std::span<const double> processing, double uplink, NodeId entry,
                          double input_payload, const NetworkGraph& g) {
  return complete(dag, catalog, path, processing, uplink, entry, input_payload,
                  route_transfer(g));
}

}  // namespace edgefm
