#include "sdmdp/delayed/aug_pkd_model.hpp"

#include "sdmdp/core/errors.hpp"

namespace sdmdp {

EllTable delayed_ell_table(const TabularMdp& mdp, const DelayModel& d, double episodes, double delta) {
  EllTable t;
  for (int len = 0; len <= d.d_max() + 1; ++len) {
    auto ell = [&](double b) {
      return ell_star_delayed(len, b, mdp.horizon(), d.delta_max(), mdp.num_states(), mdp.num_actions(),
                              episodes, delta);
    };
    t.successor.push_back(ell(mdp.branching_bound()));
    t.reveal.push_back(ell(2.0));
  }
  return t;
}

AugPkdModel::AugPkdModel(const TabularMdp& mdp, const DelayModel& d, DelayKnowledge knowledge, EllTable ell)
    : mdp_(mdp),
      d_(d),
      knowledge_(knowledge),
      ell_(std::move(ell)),
      indexer_(make_indexer(mdp, d)),
      features_(mdp.num_states(), mdp.num_actions(), d.delta_max()),
      H_(mdp.horizon()),
      A_(mdp.num_actions()) {
  if (d.num_states() != mdp.num_states() || d.num_actions() != mdp.num_actions()) {
    throw ValidationError("delay model dimensions do not match the MDP");
  }
  const auto need = static_cast<std::size_t>(d.d_max() + 2);
  if (ell_.successor.size() < need || ell_.reveal.size() < need) {
    throw ValidationError("log-term table must cover queue lengths 0..D_max+1");
  }
}

}  // namespace sdmdp
