#ifndef XLATE_MATCHING_STATE_HPP
#define XLATE_MATCHING_STATE_HPP

#include <stdexcept>
#include <utility>
#include <vector>

namespace xlate {

/// Partial injective map between X clusters and Y clusters.
class MatchingState {
public:
    MatchingState() = default;
    MatchingState(int n_x, int n_y) : partner_of_x_(static_cast<std::size_t>(n_x), -1),
                                      partner_of_y_(static_cast<std::size_t>(n_y), -1) {}

    int n_x() const { return static_cast<int>(partner_of_x_.size()); }
    int n_y() const { return static_cast<int>(partner_of_y_.size()); }

    /// Partner index or -1.
    int partner_of_x(int kx) const { return partner_of_x_.at(static_cast<std::size_t>(kx)); }
    int partner_of_y(int ky) const { return partner_of_y_.at(static_cast<std::size_t>(ky)); }

    void link(int kx, int ky) {
        if (partner_of_x(kx) >= 0 || partner_of_y(ky) >= 0) {
            throw std::logic_error("link: cluster already matched");
        }
        partner_of_x_[static_cast<std::size_t>(kx)] = ky;
        partner_of_y_[static_cast<std::size_t>(ky)] = kx;
    }

    void unlink(int kx) {
        const int ky = partner_of_x(kx);
        if (ky < 0) throw std::logic_error("unlink: cluster not matched");
        partner_of_x_[static_cast<std::size_t>(kx)] = -1;
        partner_of_y_[static_cast<std::size_t>(ky)] = -1;
    }

    int n_links() const {
        int n = 0;
        for (int p : partner_of_x_) n += p >= 0;
        return n;
    }

    int n_unmatched_y() const { return n_y() - n_links(); }

    std::vector<std::pair<int, int>> links() const {
        std::vector<std::pair<int, int>> out;
        for (int kx = 0; kx < n_x(); ++kx) {
            if (partner_of_x_[static_cast<std::size_t>(kx)] >= 0) {
                out.emplace_back(kx, partner_of_x_[static_cast<std::size_t>(kx)]);
            }
        }
        return out;
    }

    bool is_injective() const {
        for (int kx = 0; kx < n_x(); ++kx) {
            const int ky = partner_of_x(kx);
            if (ky >= 0 && (ky >= n_y() || partner_of_y(ky) != kx)) return false;
        }
        for (int ky = 0; ky < n_y(); ++ky) {
            const int kx = partner_of_y(ky);
            if (kx >= 0 && (kx >= n_x() || partner_of_x(kx) != ky)) return false;
        }
        return true;
    }

    bool operator==(const MatchingState&) const = default;

private:
    std::vector<int> partner_of_x_;
    std::vector<int> partner_of_y_;
};

} // namespace xlate

#endif // XLATE_MATCHING_STATE_HPP
