#include "wsvod/ema.hpp"

#include <stdexcept>

namespace wsvod {

ParameterVector blend(const ParameterVector& a, const ParameterVector& b, double alpha) {
    if (a.size() != b.size()) throw std::invalid_argument("blend: size mismatch");
    if (!(alpha >= 0.0 && alpha <= 1.0))
        throw std::invalid_argument("blend: alpha outside [0, 1]");
    if (alpha == 1.0) return a;
    if (alpha == 0.0) return b;
    ParameterVector out(a.size());
    for (std::size_t i = 0; i < a.size(); ++i) out[i] = alpha * a[i] + (1.0 - alpha) * b[i];
    return out;
}

double adaptive_alpha_e(double m_t, double m_s, const TSMRConfig& cfg) {
    const double s = sigmoid(cfg.tau0 * (m_t - m_s) + cfg.tau1);
    return cfg.alpha_e_min + (cfg.alpha_e_max - cfg.alpha_e_min) * s;
}

double inverse_alpha(double m_t, double m_s, const TSMRConfig& cfg) {
    if (m_t <= m_s) return 1.0;
    const double s = sigmoid(cfg.tau2 * (m_s - m_t));
    return cfg.alpha_inv_min + (2.0 - 2.0 * cfg.alpha_inv_min) * s;
}

void ema_iteration(ModelState& s, double alpha_i) {
    s.theta_iter = blend(s.theta_iter, s.theta, alpha_i);
}

void ema_epoch(ModelState& s, double alpha_e) {
    s.theta_epoch = blend(s.theta_epoch, s.theta_iter, alpha_e);
}

TSMRRates tsmr_step(ModelState& s, double m_t, double m_s, const TSMRConfig& cfg) {
    TSMRRates rates;
    rates.alpha_e = cfg.adaptive ? adaptive_alpha_e(m_t, m_s, cfg) : cfg.alpha_e_fixed;
    s.theta_epoch = blend(s.theta_epoch, s.theta_iter, rates.alpha_e);
    rates.alpha_inv = cfg.adaptive ? inverse_alpha(m_t, m_s, cfg) : 1.0;
    if (rates.alpha_inv < 1.0) {
        s.theta_iter = blend(s.theta_iter, s.theta_epoch, rates.alpha_inv);
        s.theta = blend(s.theta, s.theta_epoch, rates.alpha_inv);
    }
    return rates;
}

}  // namespace wsvod
