#pragma once

#include <array>
#include <string>
#include <vector>

#include "eogscrub/layers.hpp"

namespace eogscrub {

// Encoder-decoder with `depth` down blocks (two 3x3 convs + ELU, then 2x2 max
// pool), a two-conv bottleneck without dropout, mirrored up blocks (stride-2
// 2x2 transposed conv halving the channels, skip concatenation, two 3x3
// convs + ELU) and a linear 1x1 regression head. Feature maps double at each
// pooling, starting from base_width. Dropout (inverted, rate 0.5 by default)
// sits after the second conv of the two deepest encoder blocks.
struct UNetConfig {
  uint32_t depth = 4;
  uint32_t base_width = 16;
  uint32_t in_channels = 1;
  uint32_t out_channels = 1;
  float elu_alpha = 1.0f;
  float dropout_rate = 0.5f;

  void validate() const {
    if (depth < 1 || depth > 10) throw InvalidConfig("unet: depth out of range");
    if (base_width < 1) throw InvalidConfig("unet: base_width must be >= 1");
    if (in_channels < 1 || out_channels < 1) throw InvalidConfig("unet: channels must be >= 1");
    if (!(dropout_rate >= 0.0f && dropout_rate < 1.0f)) throw BadRate("unet: dropout rate");
    if (!(elu_alpha > 0.0f)) throw InvalidConfig("unet: elu_alpha must be positive");
  }

  uint32_t features(uint32_t level) const { return base_width << level; }

  bool operator==(const UNetConfig&) const = default;
};

// Mutable view of one named parameter tensor and its gradient buffer.
template <typename T>
struct ParamView {
  std::string name;
  std::vector<uint32_t> shape;
  T* value = nullptr;
  T* grad = nullptr;
  size_t size = 0;
};

template <typename T>
struct UNetCache {
  struct Block {
    Tensor4<T> x_in;  // input to the block's first conv
    Tensor4<T> a1;    // after first conv + ELU
    Tensor4<T> a2;    // after second conv + ELU
    std::vector<uint8_t> dropout_mask;
    std::vector<uint8_t> pool_mask;
  };
  bool valid = false;
  std::vector<Block> enc;
  Block bottleneck;
  std::vector<Block> dec;        // index = level, executed deepest-first
  std::vector<Tensor4<T>> up_in; // decoder inputs (bottleneck/decoder outputs)
};

template <typename T>
class UNet {
 public:
  UNet(const UNetConfig& cfg, uint64_t init_seed) : cfg_(cfg) {
    cfg_.validate();
    build();
    init_weights(init_seed);
  }

  const UNetConfig& config() const { return cfg_; }

  Tensor4<T> forward(const Tensor4<T>& x, bool training, Rng& rng,
                     UNetCache<T>* cache = nullptr) {
    check_input(x);
    if (cache) {
      cache->valid = false;
      cache->enc.resize(cfg_.depth);
      cache->dec.resize(cfg_.depth);
      cache->up_in.assign(cfg_.depth, Tensor4<T>());
    }
    const bool drop = training && cfg_.dropout_rate > 0.0f;
    const T alpha = T(cfg_.elu_alpha);

    std::vector<Tensor4<T>> skips(cfg_.depth);
    Tensor4<T> cur = x;
    for (uint32_t k = 0; k < cfg_.depth; ++k) {
      auto& block = enc_[k];
      Tensor4<T> a1 = elu_forward(conv2d_forward(cur, block[0].w, block[0].b, ws_), alpha);
      Tensor4<T> a2 = elu_forward(conv2d_forward(a1, block[1].w, block[1].b, ws_), alpha);
      std::vector<uint8_t> mask;
      Tensor4<T> d2 = (drop && k + 2 >= cfg_.depth)
                          ? dropout_forward(a2, double(cfg_.dropout_rate), rng, true, mask)
                          : a2;
      std::vector<uint8_t> pool_mask;
      Tensor4<T> pooled = maxpool2_forward(d2, pool_mask);
      if (cache) {
        cache->enc[k].x_in = std::move(cur);
        cache->enc[k].a1 = std::move(a1);
        cache->enc[k].a2 = a2;
        cache->enc[k].dropout_mask = std::move(mask);
        cache->enc[k].pool_mask = std::move(pool_mask);
      }
      skips[k] = std::move(d2);
      cur = std::move(pooled);
    }

    Tensor4<T> b1 = elu_forward(conv2d_forward(cur, bott_[0].w, bott_[0].b, ws_), alpha);
    Tensor4<T> b2 = elu_forward(conv2d_forward(b1, bott_[1].w, bott_[1].b, ws_), alpha);
    if (cache) {
      cache->bottleneck.x_in = std::move(cur);
      cache->bottleneck.a1 = std::move(b1);
      cache->bottleneck.a2 = b2;
    }
    cur = std::move(b2);

    for (uint32_t level = cfg_.depth; level-- > 0;) {
      auto& block = dec_[level];
      if (cache) cache->up_in[level] = cur;
      Tensor4<T> up = convt2_forward(cur, block.up.w, block.up.b, ws_);
      Tensor4<T> cat = concat_forward(skips[level], up);
      Tensor4<T> a1 = elu_forward(conv2d_forward(cat, block.conv1.w, block.conv1.b, ws_), alpha);
      Tensor4<T> a2 = elu_forward(conv2d_forward(a1, block.conv2.w, block.conv2.b, ws_), alpha);
      if (cache) {
        cache->dec[level].x_in = std::move(cat);
        cache->dec[level].a1 = std::move(a1);
        cache->dec[level].a2 = a2;
      }
      cur = std::move(a2);
    }

    Tensor4<T> out = conv2d_forward(cur, head_.w, head_.b, ws_);
    if (cache) valid_mark(*cache, x);
    return out;
  }

  Tensor4<T> predict(const Tensor4<T>& x) {
    Rng unused(0);
    return forward(x, false, unused);
  }

  // Accumulates parameter gradients for the cached forward pass and returns
  // the gradient with respect to the network input.
  Tensor4<T> backward(const UNetCache<T>& cache, const Tensor4<T>& grad_out) {
    if (!cache.valid) throw StaleCache("unet backward: cache not populated by forward");
    const auto& head_in = cache.dec[0].a2;
    if (grad_out.n != head_in.n || grad_out.c != cfg_.out_channels ||
        grad_out.h != head_in.h || grad_out.w != head_in.w)
      throw ShapeMismatch("unet backward: grad_out shape " + grad_out.shape_str());
    const T alpha = T(cfg_.elu_alpha);

    Tensor4<T> grad_cur(head_in.n, head_in.c, head_in.h, head_in.w);
    conv2d_backward(head_in, head_.w, grad_out, &grad_cur, head_.gw, head_.gb, ws_);

    std::vector<Tensor4<T>> skip_grads(cfg_.depth);
    for (uint32_t level = 0; level < cfg_.depth; ++level) {
      auto& block = dec_[level];
      const auto& c = cache.dec[level];
      Tensor4<T> g2 = elu_backward(c.a2, grad_cur, alpha);
      Tensor4<T> g_a1(c.a1.n, c.a1.c, c.a1.h, c.a1.w);
      conv2d_backward(c.a1, block.conv2.w, g2, &g_a1, block.conv2.gw, block.conv2.gb, ws_);
      Tensor4<T> g1 = elu_backward(c.a1, g_a1, alpha);
      Tensor4<T> g_cat(c.x_in.n, c.x_in.c, c.x_in.h, c.x_in.w);
      conv2d_backward(c.x_in, block.conv1.w, g1, &g_cat, block.conv1.gw, block.conv1.gb, ws_);
      Tensor4<T> g_up;
      concat_backward(g_cat, cfg_.features(level), skip_grads[level], g_up);
      Tensor4<T> g_below;
      convt2_backward(cache.up_in[level], block.up.w, g_up, g_below, block.up.gw, block.up.gb,
                      ws_);
      grad_cur = std::move(g_below);
    }

    {
      const auto& c = cache.bottleneck;
      Tensor4<T> g2 = elu_backward(c.a2, grad_cur, alpha);
      Tensor4<T> g_a1(c.a1.n, c.a1.c, c.a1.h, c.a1.w);
      conv2d_backward(c.a1, bott_[1].w, g2, &g_a1, bott_[1].gw, bott_[1].gb, ws_);
      Tensor4<T> g1 = elu_backward(c.a1, g_a1, alpha);
      Tensor4<T> g_in(c.x_in.n, c.x_in.c, c.x_in.h, c.x_in.w);
      conv2d_backward(c.x_in, bott_[0].w, g1, &g_in, bott_[0].gw, bott_[0].gb, ws_);
      grad_cur = std::move(g_in);
    }

    for (uint32_t k = cfg_.depth; k-- > 0;) {
      auto& block = enc_[k];
      const auto& c = cache.enc[k];
      Tensor4<T> g_d2 = maxpool2_backward(grad_cur, c.pool_mask, c.a2.h, c.a2.w);
      for (size_t i = 0; i < g_d2.data.size(); ++i) g_d2.data[i] += skip_grads[k].data[i];
      Tensor4<T> g_a2 = dropout_backward(g_d2, c.dropout_mask, double(cfg_.dropout_rate));
      Tensor4<T> g2 = elu_backward(c.a2, g_a2, alpha);
      Tensor4<T> g_a1(c.a1.n, c.a1.c, c.a1.h, c.a1.w);
      conv2d_backward(c.a1, block[1].w, g2, &g_a1, block[1].gw, block[1].gb, ws_);
      Tensor4<T> g1 = elu_backward(c.a1, g_a1, alpha);
      Tensor4<T> g_in(c.x_in.n, c.x_in.c, c.x_in.h, c.x_in.w);
      conv2d_backward(c.x_in, block[0].w, g1, &g_in, block[0].gw, block[0].gb, ws_);
      grad_cur = std::move(g_in);
    }
    return grad_cur;
  }

  void zero_grads() {
    for (auto& view : params()) std::fill(view.grad, view.grad + view.size, T(0));
  }

  std::vector<ParamView<T>> params() {
    std::vector<ParamView<T>> views;
    auto add = [&views](ConvParam& p) {
      views.push_back({p.name + ".w",
                       {p.w.n, p.w.c, p.w.h, p.w.w},
                       p.w.data.data(),
                       p.gw.data.data(),
                       p.w.data.size()});
      views.push_back({p.name + ".b", {uint32_t(p.b.size())}, p.b.data(), p.gb.data(),
                       p.b.size()});
    };
    for (auto& block : enc_) { add(block[0]); add(block[1]); }
    add(bott_[0]);
    add(bott_[1]);
    for (uint32_t level = cfg_.depth; level-- > 0;) {
      add(dec_[level].up);
      add(dec_[level].conv1);
      add(dec_[level].conv2);
    }
    add(head_);
    return views;
  }

  size_t parameter_count() {
    size_t total = 0;
    for (const auto& view : params()) total += view.size;
    return total;
  }

 private:
  struct ConvParam {
    std::string name;
    Tensor4<T> w, gw;
    std::vector<T> b, gb;
  };
  struct DecBlock {
    ConvParam up, conv1, conv2;
  };

  static ConvParam make_conv(const std::string& name, uint32_t cout, uint32_t cin, uint32_t k) {
    ConvParam p;
    p.name = name;
    p.w = Tensor4<T>(cout, cin, k, k);
    p.gw = Tensor4<T>(cout, cin, k, k);
    p.b.assign(cout, T(0));
    p.gb.assign(cout, T(0));
    return p;
  }

  // Transposed conv weights are stored (Cin, Cout, 2, 2).
  static ConvParam make_deconv(const std::string& name, uint32_t cin, uint32_t cout) {
    ConvParam p;
    p.name = name;
    p.w = Tensor4<T>(cin, cout, 2, 2);
    p.gw = Tensor4<T>(cin, cout, 2, 2);
    p.b.assign(cout, T(0));
    p.gb.assign(cout, T(0));
    return p;
  }

  void build() {
    enc_.clear();
    dec_.resize(cfg_.depth);
    uint32_t prev = cfg_.in_channels;
    for (uint32_t k = 0; k < cfg_.depth; ++k) {
      const uint32_t f = cfg_.features(k);
      const std::string base = "enc" + std::to_string(k);
      enc_.push_back({make_conv(base + ".conv1", f, prev, 3), make_conv(base + ".conv2", f, f, 3)});
      prev = f;
    }
    const uint32_t fb = cfg_.features(cfg_.depth);
    bott_[0] = make_conv("bottleneck.conv1", fb, prev, 3);
    bott_[1] = make_conv("bottleneck.conv2", fb, fb, 3);
    for (uint32_t level = cfg_.depth; level-- > 0;) {
      const uint32_t f = cfg_.features(level);
      const std::string base = "dec" + std::to_string(level);
      dec_[level].up = make_deconv(base + ".up", 2 * f, f);
      dec_[level].conv1 = make_conv(base + ".conv1", f, 2 * f, 3);
      dec_[level].conv2 = make_conv(base + ".conv2", f, f, 3);
    }
    head_ = make_conv("head", cfg_.out_channels, cfg_.base_width, 1);
  }

  // He-style uniform, half-open range scaled by each weight's fan-in. Biases
  // start at zero. A single seeded stream in canonical parameter order keeps
  // initialization reproducible.
  void init_weights(uint64_t seed) {
    Rng rng(derive_seed(seed, RngStream::kWeightInit));
    for (auto& view : params()) {
      if (view.name.ends_with(".b")) continue;
      size_t fan_in;
      if (view.name.ends_with("up.w")) {
        fan_in = view.shape[0];  // stride == kernel: one tap per input channel
      } else {
        fan_in = size_t(view.shape[1]) * view.shape[2] * view.shape[3];
      }
      const double limit = std::sqrt(6.0 / double(fan_in));
      for (size_t i = 0; i < view.size; ++i)
        view.value[i] = T(rng.uniform(-limit, limit));
    }
  }

  void check_input(const Tensor4<T>& x) const {
    if (x.c != cfg_.in_channels)
      throw ShapeMismatch("unet: expected " + std::to_string(cfg_.in_channels) +
                          " input channels, got " + std::to_string(x.c));
    const uint32_t div = 1u << cfg_.depth;
    if (x.n == 0 || x.h == 0 || x.w == 0 || x.h % div != 0 || x.w % div != 0)
      throw ShapeMismatch("unet: input " + x.shape_str() + " not divisible by 2^depth");
  }

  void valid_mark(UNetCache<T>& cache, const Tensor4<T>&) const { cache.valid = true; }

  UNetConfig cfg_;
  std::vector<std::array<ConvParam, 2>> enc_;
  std::array<ConvParam, 2> bott_;
  std::vector<DecBlock> dec_;
  ConvParam head_;
  Workspace<T> ws_;
};

}  // namespace eogscrub
