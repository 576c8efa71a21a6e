#pragma once

#include <functional>
#include <map>
#include <memory>
#include <string>
#include <vector>

#include "erie/queue.hpp"

namespace erie {

// One audio filter applied to a single event's samples. Lifecycle per event:
// intake(event, sampleRate) reads the filter's encoding-channel values, then
// process() runs the samples, then finish() may append a release tail.
class FilterInstance {
  public:
    virtual ~FilterInstance() = default;
    virtual void intake(const ToneEvent& event, int sampleRate) = 0;
    virtual void process(std::vector<double>& samples) = 0;
    virtual void finish(std::vector<double>& samples) { (void)samples; }
};

using FilterFactory = std::function<std::unique_ptr<FilterInstance>()>;

class FilterRegistry {
  public:
    FilterRegistry();  // presets: biquad family, envelope, distortion, compressor

    // Rejects duplicate names.
    void register_filter(const std::string& name, FilterFactory factory);
    bool has(const std::string& name) const;
    std::unique_ptr<FilterInstance> make(const std::string& name) const;

  private:
    std::map<std::string, FilterFactory> factories_;
};

// Filters chained left to right; each applied after the previous.
void apply_filter_chain(const FilterRegistry& registry,
                        const std::vector<std::string>& chain, const ToneEvent& event,
                        int sampleRate, std::vector<double>& samples);

// Audio-cookbook biquad, reused by filters and tests.
struct Biquad {
    double b0 = 1, b1 = 0, b2 = 0, a1 = 0, a2 = 0;
    double z1 = 0, z2 = 0;

    enum class Type { Lowpass, Highpass, Bandpass, Notch, Peaking };
    static Biquad design(Type type, double freq, double q, double gainDb, int sampleRate);
    double step(double x);
};

}  // namespace erie
