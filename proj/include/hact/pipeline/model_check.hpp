#pragma once

#include <span>
#include <vector>

#include "hact/core/error.hpp"
#include "hact/gnn/hactnet.hpp"
#include "hact/nn/gradcheck.hpp"
#include "hact/nn/loss.hpp"

namespace hact::pipeline {

/// Finite-difference check of the full model's cross-entropy gradient over
/// one batch. Normalisation buffers are restored afterwards.
inline nn::GradcheckResult model_gradcheck(gnn::HactNet& net, std::span<const graph::HactGraph> graphs,
                                           std::span<const std::size_t> labels, nn::Mode mode,
                                           const nn::GradcheckOptions& opt = {}) {
  require(graphs.size() == labels.size() && !graphs.empty(), Errc::invalid_argument,
          "gradcheck needs one label per graph and at least one graph");
  std::vector<const graph::HactGraph*> ptr;
  for (const auto& g : graphs) ptr.push_back(&g);
  const gnn::HactBatch batch = gnn::make_batch(ptr);
  const auto params = net.parameters();
  const auto buffers = net.buffers();
  std::vector<Tensor> saved;
  for (const auto& [name, b] : buffers) saved.push_back(*b);

  auto loss = [&] { return nn::softmax_cross_entropy(net.forward(batch, mode), labels).loss; };
  auto grads = [&] {
    nn::zero_grads(params);
    gnn::HactNet::Tape tape;
    const Tensor logits = net.forward(batch, mode, tape);
    net.backward(batch, tape, nn::softmax_cross_entropy(logits, labels).grad);
  };
  const auto res = nn::gradcheck(params, loss, grads, opt);
  for (std::size_t i = 0; i < buffers.size(); ++i) *buffers[i].second = saved[i];
  return res;
}

}  // namespace hact::pipeline
