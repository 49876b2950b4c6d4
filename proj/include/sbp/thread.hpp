#pragma once

#include <concepts>
#include <cstdint>
#include <cstring>
#include <memory>
#include <string>
#include <string_view>
#include <type_traits>
#include <typeinfo>
#include <utility>
#include <variant>

#include "sbp/sync.hpp"

namespace sbp {

/// Byte sink used to serialize thread states for snapshots.
class StateEncoder {
 public:
  void put(std::uint64_t word) { put_raw(&word, sizeof word); }
  void put_bytes(std::string_view bytes) {
    put(bytes.size());
    buffer_.append(bytes);
  }
  void put_raw(const void* data, std::size_t size) {
    buffer_.append(static_cast<const char*>(data), size);
  }

  const std::string& bytes() const noexcept { return buffer_; }
  void clear() noexcept { buffer_.clear(); }

 private:
  std::string buffer_;
};

template <class T>
concept SelfEncoding = requires(const T& t, StateEncoder& enc) { t.encode(enc); };

template <class T>
concept StateEncodable =
    SelfEncoding<T> || std::same_as<T, std::monostate> ||
    (std::is_trivially_copyable_v<T> && std::has_unique_object_representations_v<T>);

template <StateEncodable T>
void encode_state(StateEncoder& enc, const T& state) {
  if constexpr (SelfEncoding<T>) {
    state.encode(enc);
  } else if constexpr (std::same_as<T, std::monostate>) {
    (void)enc;
  } else {
    enc.put_raw(&state, sizeof(T));
  }
}

/// A scenario thread's behavior as an explicit deterministic state machine.
///
/// `declare(state)` yields the thread's current MultiSync (or nullopt when
/// done) and must depend on the state alone. `advance(state, event)` is the
/// pure transition taken when the thread is resumed by `event`.
template <class B>
concept Behavior =
    std::copy_constructible<typename B::State> && std::equality_comparable<typename B::State> &&
    StateEncodable<typename B::State> &&
    requires(const B& b, const typename B::State& s, EventId e) {
      { b.initial() } -> std::convertible_to<typename B::State>;
      { b.declare(s) } -> std::same_as<Yield>;
      { b.advance(s, e) } -> std::convertible_to<typename B::State>;
    };

namespace detail {

struct ThreadModel {
  virtual ~ThreadModel() = default;
  virtual Yield declare() const = 0;
  virtual std::shared_ptr<const ThreadModel> advance(EventId e) const = 0;
  virtual void encode(StateEncoder& enc) const = 0;
  virtual bool same_state(const ThreadModel& other) const = 0;
};

template <Behavior B>
class BehaviorModel final : public ThreadModel {
 public:
  using State = typename B::State;

  BehaviorModel(std::shared_ptr<const B> behavior, State state)
      : behavior_(std::move(behavior)), state_(std::move(state)) {}

  Yield declare() const override { return behavior_->declare(state_); }

  std::shared_ptr<const ThreadModel> advance(EventId e) const override {
    return std::make_shared<BehaviorModel>(behavior_, behavior_->advance(state_, e));
  }

  void encode(StateEncoder& enc) const override { encode_state(enc, state_); }

  bool same_state(const ThreadModel& other) const override {
    const auto* o = dynamic_cast<const BehaviorModel*>(&other);
    return o != nullptr && o->state_ == state_;
  }

  const B& behavior() const noexcept { return *behavior_; }
  const State& state() const noexcept { return state_; }

 private:
  std::shared_ptr<const B> behavior_;
  State state_;
};

}  // namespace detail

/// A named, immutable scenario thread value: behavior plus current state.
/// Copies are cheap and share the behavior; advancing produces a new value.
class ScenarioThread {
 public:
  template <Behavior B>
  ScenarioThread(std::string name, B behavior) : name_(std::make_shared<std::string>(std::move(name))) {
    auto shared = std::make_shared<const B>(std::move(behavior));
    auto state = shared->initial();
    model_ = std::make_shared<detail::BehaviorModel<B>>(std::move(shared), std::move(state));
  }

  const std::string& name() const noexcept { return *name_; }

  Yield declare() const { return model_->declare(); }

  ScenarioThread advanced(EventId e) const { return ScenarioThread(name_, model_->advance(e)); }

  void encode(StateEncoder& enc) const { model_->encode(enc); }

  bool same_state(const ScenarioThread& other) const {
    return *name_ == *other.name_ && model_->same_state(*other.model_);
  }

  /// Typed access for inspection in tests and tools; null on type mismatch.
  template <Behavior B>
  const typename B::State* state_as() const {
    const auto* m = dynamic_cast<const detail::BehaviorModel<B>*>(model_.get());
    return m ? &m->state() : nullptr;
  }

  template <Behavior B>
  const B* behavior_as() const {
    const auto* m = dynamic_cast<const detail::BehaviorModel<B>*>(model_.get());
    return m ? &m->behavior() : nullptr;
  }

 private:
  ScenarioThread(std::shared_ptr<const std::string> name, std::shared_ptr<const detail::ThreadModel> model)
      : name_(std::move(name)), model_(std::move(model)) {}

  std::shared_ptr<const std::string> name_;
  std::shared_ptr<const detail::ThreadModel> model_;
};

/// Behavior assembled from callables, for small ad-hoc threads.
template <class S, class DeclareFn, class AdvanceFn>
struct FunctionBehavior {
  using State = S;
  S start;
  DeclareFn declare_fn;
  AdvanceFn advance_fn;

  S initial() const { return start; }
  Yield declare(const S& s) const { return declare_fn(s); }
  S advance(const S& s, EventId e) const { return advance_fn(s, e); }
};

template <class S, class DeclareFn, class AdvanceFn>
ScenarioThread make_thread(std::string name, S initial, DeclareFn declare, AdvanceFn advance) {
  return ScenarioThread(std::move(name), FunctionBehavior<S, DeclareFn, AdvanceFn>{
                                             std::move(initial), std::move(declare), std::move(advance)});
}

/// Thread that yields the same declaration forever (or until resumed, if
/// `once` is set, after which it is done).
struct ConstantBehavior {
  using State = std::uint8_t;  // 0 = active, 1 = done
  MultiSync sync;
  bool once = false;

  State initial() const { return 0; }
  Yield declare(State s) const {
    if (s == 1) return std::nullopt;
    return sync;
  }
  State advance(State, EventId) const { return once ? 1 : 0; }
};

}  // namespace sbp
