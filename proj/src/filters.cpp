#include "erie/filters.hpp"

#include <algorithm>
#include <cmath>

#include "erie/channels.hpp"
#include "erie/error.hpp"

namespace erie {

namespace {

constexpr double kTwoPi = 6.283185307179586476925286766559;

double extra_or(const ToneEvent& ev, const char* name, double fallback) {
    auto it = ev.extra.find(name);
    return it == ev.extra.end() ? fallback : it->second;
}

class BiquadFilter : public FilterInstance {
  public:
    explicit BiquadFilter(Biquad::Type type) : type_(type) {}

    void intake(const ToneEvent& event, int sampleRate) override {
        double freq = extra_or(event, "biquadFrequency", 1000.0);
        double q = extra_or(event, "biquadQ", 1.0);
        double gain = extra_or(event, "biquadGain", type_ == Biquad::Type::Peaking ? 6.0 : 0.0);
        if (freq <= 0 || freq >= sampleRate / 2.0)
            throw Error(Error::Kind::Render,
                        "biquad cutoff " + std::to_string(freq) + " outside (0, Nyquist)");
        biquad_ = Biquad::design(type_, freq, q, gain, sampleRate);
    }

    void process(std::vector<double>& samples) override {
        for (double& s : samples) s = biquad_.step(s);
    }

  private:
    Biquad::Type type_;
    Biquad biquad_;
};

// ADSR gain envelope; release extends past the event as a tail.
class EnvelopeFilter : public FilterInstance {
  public:
    void intake(const ToneEvent& event, int sampleRate) override {
        sampleRate_ = sampleRate;
        attack_ = std::max(0.0, extra_or(event, "envelopeAttack", 0.01));
        decay_ = std::max(0.0, extra_or(event, "envelopeDecay", 0.05));
        sustain_ = std::clamp(extra_or(event, "envelopeSustain", 1.0), 0.0, 1.0);
        release_ = std::max(0.0, extra_or(event, "envelopeRelease", 0.05));
    }

    void process(std::vector<double>& samples) override {
        std::size_t n = samples.size();
        for (std::size_t i = 0; i < n; ++i) {
            double t = static_cast<double>(i) / sampleRate_;
            double g;
            if (t < attack_ && attack_ > 0)
                g = t / attack_;
            else if (t < attack_ + decay_ && decay_ > 0)
                g = 1.0 + (sustain_ - 1.0) * ((t - attack_) / decay_);
            else
                g = sustain_;
            samples[i] *= g;
        }
    }

    void finish(std::vector<double>& samples) override {
        if (release_ <= 0 || samples.empty()) return;
        std::size_t tail = static_cast<std::size_t>(release_ * sampleRate_);
        std::size_t n = samples.size();
        samples.resize(n + tail, 0.0);
        // fade the boundary value out over the release window
        double edge = samples[n - 1];
        for (std::size_t i = 0; i < tail; ++i) {
            double g = 1.0 - static_cast<double>(i + 1) / static_cast<double>(tail);
            samples[n + i] = edge * g;
        }
    }

  private:
    int sampleRate_ = 44100;
    double attack_ = 0.01, decay_ = 0.05, sustain_ = 1.0, release_ = 0.05;
};

class DistortionFilter : public FilterInstance {
  public:
    void intake(const ToneEvent& event, int sampleRate) override {
        (void)sampleRate;
        drive_ = std::max(0.0, extra_or(event, "distortionDrive", 1.0));
    }

    void process(std::vector<double>& samples) override {
        if (drive_ <= 0) return;
        double norm = std::tanh(drive_);
        if (norm < 1e-9) return;
        for (double& s : samples) s = std::tanh(drive_ * s) / norm;
    }

  private:
    double drive_ = 1.0;
};

// Feed-forward compressor: 10 ms attack, 100 ms release on the gain follower.
class CompressorFilter : public FilterInstance {
  public:
    void intake(const ToneEvent& event, int sampleRate) override {
        sampleRate_ = sampleRate;
        thresholdDb_ = extra_or(event, "compressorThreshold", -24.0);
        ratio_ = std::max(1.0, extra_or(event, "compressorRatio", 4.0));
    }

    void process(std::vector<double>& samples) override {
        const double attackCoef = std::exp(-1.0 / (0.010 * sampleRate_));
        const double releaseCoef = std::exp(-1.0 / (0.100 * sampleRate_));
        double envDb = -120.0;
        for (double& s : samples) {
            double levelDb = 20.0 * std::log10(std::max(1e-6, std::abs(s)));
            double coef = levelDb > envDb ? attackCoef : releaseCoef;
            envDb = coef * envDb + (1.0 - coef) * levelDb;
            double over = envDb - thresholdDb_;
            double gainDb = over > 0 ? -over * (1.0 - 1.0 / ratio_) : 0.0;
            s *= std::pow(10.0, gainDb / 20.0);
        }
    }

  private:
    int sampleRate_ = 44100;
    double thresholdDb_ = -24.0;
    double ratio_ = 4.0;
};

}  // namespace

Biquad Biquad::design(Type type, double freq, double q, double gainDb, int sampleRate) {
    double w0 = kTwoPi * freq / sampleRate;
    double cw = std::cos(w0);
    double sw = std::sin(w0);
    double alpha = sw / (2.0 * std::max(1e-6, q));
    double A = std::pow(10.0, gainDb / 40.0);

    double b0 = 1, b1 = 0, b2 = 0, a0 = 1, a1 = 0, a2 = 0;
    switch (type) {
        case Type::Lowpass:
            b0 = (1 - cw) / 2;
            b1 = 1 - cw;
            b2 = (1 - cw) / 2;
            a0 = 1 + alpha;
            a1 = -2 * cw;
            a2 = 1 - alpha;
            break;
        case Type::Highpass:
            b0 = (1 + cw) / 2;
            b1 = -(1 + cw);
            b2 = (1 + cw) / 2;
            a0 = 1 + alpha;
            a1 = -2 * cw;
            a2 = 1 - alpha;
            break;
        case Type::Bandpass:
            b0 = alpha;
            b1 = 0;
            b2 = -alpha;
            a0 = 1 + alpha;
            a1 = -2 * cw;
            a2 = 1 - alpha;
            break;
        case Type::Notch:
            b0 = 1;
            b1 = -2 * cw;
            b2 = 1;
            a0 = 1 + alpha;
            a1 = -2 * cw;
            a2 = 1 - alpha;
            break;
        case Type::Peaking:
            b0 = 1 + alpha * A;
            b1 = -2 * cw;
            b2 = 1 - alpha * A;
            a0 = 1 + alpha / A;
            a1 = -2 * cw;
            a2 = 1 - alpha / A;
            break;
    }
    Biquad out;
    out.b0 = b0 / a0;
    out.b1 = b1 / a0;
    out.b2 = b2 / a0;
    out.a1 = a1 / a0;
    out.a2 = a2 / a0;
    return out;
}

double Biquad::step(double x) {
    // transposed direct form II
    double y = b0 * x + z1;
    z1 = b1 * x - a1 * y + z2;
    z2 = b2 * x - a2 * y;
    return y;
}

FilterRegistry::FilterRegistry() {
    register_filter("lowpass", [] { return std::make_unique<BiquadFilter>(Biquad::Type::Lowpass); });
    register_filter("highpass",
                    [] { return std::make_unique<BiquadFilter>(Biquad::Type::Highpass); });
    register_filter("bandpass",
                    [] { return std::make_unique<BiquadFilter>(Biquad::Type::Bandpass); });
    register_filter("notch", [] { return std::make_unique<BiquadFilter>(Biquad::Type::Notch); });
    register_filter("peaking",
                    [] { return std::make_unique<BiquadFilter>(Biquad::Type::Peaking); });
    register_filter("envelope", [] { return std::make_unique<EnvelopeFilter>(); });
    register_filter("distortion", [] { return std::make_unique<DistortionFilter>(); });
    register_filter("compressor", [] { return std::make_unique<CompressorFilter>(); });
}

void FilterRegistry::register_filter(const std::string& name, FilterFactory factory) {
    if (has(name))
        throw Error(Error::Kind::Render, "filter \"" + name + "\" is already registered");
    factories_.emplace(name, std::move(factory));
}

bool FilterRegistry::has(const std::string& name) const { return factories_.count(name) > 0; }

std::unique_ptr<FilterInstance> FilterRegistry::make(const std::string& name) const {
    auto it = factories_.find(name);
    if (it == factories_.end())
        throw Error(Error::Kind::Render, "unknown filter \"" + name + "\"");
    return it->second();
}

void apply_filter_chain(const FilterRegistry& registry, const std::vector<std::string>& chain,
                        const ToneEvent& event, int sampleRate,
                        std::vector<double>& samples) {
    for (const auto& name : chain) {
        auto filter = registry.make(name);
        filter->intake(event, sampleRate);
        filter->process(samples);
        filter->finish(samples);
    }
}

}  // namespace erie
