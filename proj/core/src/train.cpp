// Copyright (c) 2026, The HTH Authors
// SPDX-License-Identifier: Apache-2.0

#include "hth/train.hpp"

#include <numeric>
#include <stdexcept>

#include "hth/checkpoint.hpp"

namespace hth {

namespace {

// Stream keys under the run seed.
constexpr std::uint64_t kInitStream = 0x1001;
constexpr std::uint64_t kTrainSetStream = 0x2001;
constexpr std::uint64_t kHeldoutStream = 0x2002;
constexpr std::uint64_t kFixedNoiseStream = 0x3001;
constexpr std::uint64_t kEvalTrainStream = 0x4001;
constexpr std::uint64_t kEvalHeldoutStream = 0x4002;
constexpr std::uint64_t kStepStream = 0x100000;

std::vector<std::size_t> iota(std::size_t n) {
    std::vector<std::size_t> v(n);
    std::iota(v.begin(), v.end(), std::size_t{0});
    return v;
}

void copy_into(Tensor& dst, const Tensor& src, const std::string& name) {
    if (dst.shape() != src.shape())
        throw ShapeError("checkpoint/config mismatch for " + name + ": expected " + shape_string(dst.shape()) +
                         ", found " + shape_string(src.shape()));
    dst = src;
}

void load_weights_from(HthModel& model, const std::vector<checkpoint::NamedTensor>& file) {
    for (auto& [name, t] : named_tensors(model.weights())) copy_into(*t, checkpoint::find(file, name), name);
}

}  // namespace

void TrainConfig::validate() const {
    if (batch == 0) throw std::invalid_argument("batch must be positive");
    if (n_samples == 0) throw std::invalid_argument("n_samples must be positive");
    if (eval_times == 0) throw std::invalid_argument("eval_times must be positive");
    if (!(lr > 0.0)) throw std::invalid_argument("lr must be positive");
}

void RunConfig::validate() const {
    model.validate();
    diffusion.validate();
    train.validate();
}

data::DataSpec RunConfig::data_spec() const {
    return {model.latent, model.latent_channels, std::min(model.n_classes, data::kClasses)};
}

EvalResult evaluate(const HthModel& model, std::span<const data::Sample> samples, std::size_t eval_times,
                    Rng noise_rng, std::span<const Tensor> fixed_eps) {
    EvalResult r;
    if (!fixed_eps.empty() && fixed_eps.size() != samples.size())
        throw std::invalid_argument("evaluate: need one noise tensor per sample");
    if (samples.empty()) return r;
    const auto idx = iota(samples.size());
    const Tensor x0 = data::stack(samples, idx);
    const auto labels = data::labels_of(samples, idx);
    const std::size_t p = model.config().patch;
    std::size_t count = 0;
    for (std::size_t k = 0; k < eval_times; ++k) {
        const double t = (static_cast<double>(k) + 0.5) / static_cast<double>(eval_times);
        Tensor eps;
        if (fixed_eps.empty()) {
            eps = noise_rng.normal_tensor(x0.shape());
        } else {
            std::vector<data::Sample> picked;
            for (const auto& e : fixed_eps) picked.push_back({e, 0});
            eps = data::stack(picked, idx);
        }
        const std::vector<double> times(samples.size(), t);
        const Tensor pred = patchify(model.denoise(diffusion::noise_batch(x0, eps, times), times, labels), p);
        const Tensor target = patchify(diffusion::velocity_target(x0, eps), p);
        const std::size_t width = target.shape().back();
        const std::size_t tokens = target.size() / width / samples.size();
        if (r.token_error.empty()) r.token_error.assign(tokens, 0.0);
        for (std::size_t row = 0; row < target.size() / width; ++row) {
            double e = 0.0;
            for (std::size_t c = 0; c < width; ++c) {
                const double d = pred[row * width + c] - target[row * width + c];
                r.loss += d * d;
                r.zero_loss += target[row * width + c] * target[row * width + c];
                e += d * d;
            }
            r.token_error[row % tokens] += e / static_cast<double>(width);
        }
        count += target.size();
    }
    r.loss /= static_cast<double>(count);
    r.zero_loss /= static_cast<double>(count);
    for (double& e : r.token_error) e /= static_cast<double>(samples.size() * eval_times);
    return r;
}

Trainer::Trainer(RunConfig cfg)
    : cfg_(std::move(cfg)),
      root_(cfg_.seed),
      model_([&] {
          cfg_.validate();
          Rng r = root_.fork(kInitStream);
          return HthModel::init(cfg_.model, r);
      }()),
      adam_(AdamConfig{.lr = cfg_.train.lr}) {
    for (auto& [name, t] : named_tensors(model_.weights())) round_to_float(*t);
    Rng ts = root_.fork(kTrainSetStream);
    train_ = data::make_dataset(cfg_.data_spec(), cfg_.train.n_samples, ts);
    Rng hs = root_.fork(kHeldoutStream);
    heldout_ = data::make_dataset(cfg_.data_spec(), cfg_.train.n_heldout, hs);
    if (cfg_.train.fixed_noise) {
        Rng ns = root_.fork(kFixedNoiseStream);
        for (const auto& s : train_) fixed_eps_.push_back(ns.normal_tensor(s.latents.shape()));
    }
}

Tensor Trainer::batch_noise(std::span<const std::size_t> idx, Rng& rng) const {
    if (!cfg_.train.fixed_noise) {
        Tensor::Shape shape{idx.size()};
        const auto& s = train_.front().latents.shape();
        shape.insert(shape.end(), s.begin(), s.end());
        return rng.normal_tensor(shape);
    }
    std::vector<data::Sample> picked;
    for (std::size_t i : idx) picked.push_back({fixed_eps_[i], 0});
    return data::stack(picked, iota(picked.size()));
}

double Trainer::step() {
    Rng r = root_.fork(kStepStream + step_);
    std::vector<std::size_t> idx = iota(train_.size());
    if (cfg_.train.batch < idx.size()) {
        for (std::size_t i = 0; i < cfg_.train.batch; ++i) std::swap(idx[i], idx[i + r.below(idx.size() - i)]);
        idx.resize(cfg_.train.batch);
    }
    const Tensor x0 = data::stack(train_, idx);
    const Tensor eps = batch_noise(idx, r);
    std::vector<double> t(idx.size());
    for (double& v : t) v = r.uniform();
    const auto labels =
        diffusion::drop_labels(data::labels_of(train_, idx), cfg_.diffusion.cond_drop, model_.null_label(), r);

    Tape tape;
    const auto w = bind(tape, model_.weights());
    const Var loss = diffusion::loss(model_, w, x0, eps, t, labels);
    const auto params = leaves(w);
    const Gradients grads = tape.grad(loss, params);

    auto named = named_tensors(model_.weights());
    std::vector<Tensor*> ptrs;
    std::vector<Tensor> g;
    for (std::size_t i = 0; i < named.size(); ++i) {
        ptrs.push_back(named[i].second);
        g.push_back(grads[i]);
    }
    adam_.step(ptrs, g);
    ++step_;
    return loss.value()[0];
}

EvalResult Trainer::evaluate_train() const {
    return evaluate(model_, train_, cfg_.train.eval_times, root_.fork(kEvalTrainStream), fixed_eps_);
}

EvalResult Trainer::evaluate_heldout() const {
    return evaluate(model_, heldout_, cfg_.train.eval_times, root_.fork(kEvalHeldoutStream));
}

void Trainer::save(const std::filesystem::path& path) const {
    std::vector<checkpoint::NamedTensor> out;
    auto named = named_tensors(const_cast<ModelWeights<Tensor>&>(model_.weights()));
    for (const auto& [name, t] : named) out.emplace_back(name, *t);
    if (!adam_.first_moments().empty()) {
        for (std::size_t i = 0; i < named.size(); ++i) {
            out.emplace_back("adam.m." + named[i].first, adam_.first_moments()[i]);
            out.emplace_back("adam.v." + named[i].first, adam_.second_moments()[i]);
        }
    }
    out.emplace_back("trainer.step", Tensor({1}, {static_cast<double>(step_)}));
    checkpoint::save(path, out);
}

void Trainer::load(const std::filesystem::path& path) {
    const auto file = checkpoint::load(path);
    load_weights_from(model_, file);
    const auto named = named_tensors(model_.weights());
    std::vector<Tensor> m, v;
    if (checkpoint::find_if_present(file, "adam.m." + named.front().first)) {
        for (const auto& [name, t] : named) {
            m.emplace_back(t->shape());
            v.emplace_back(t->shape());
            copy_into(m.back(), checkpoint::find(file, "adam.m." + name), "adam.m." + name);
            copy_into(v.back(), checkpoint::find(file, "adam.v." + name), "adam.v." + name);
        }
    }
    step_ = static_cast<std::size_t>(checkpoint::find(file, "trainer.step")[0]);
    const std::size_t adam_steps = m.empty() ? 0 : step_;
    adam_.restore(adam_steps, std::move(m), std::move(v));
}

void load_weights(HthModel& model, const std::filesystem::path& path) { load_weights_from(model, checkpoint::load(path)); }

}  // namespace hth
