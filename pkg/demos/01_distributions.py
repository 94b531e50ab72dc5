"""Tour of the three search-distribution families.

Shows sampling, the log-derivative (score), the Fisher information, and
how preconditioning by the inverse Fisher turns the score into the
natural-gradient direction.  For the categorical distribution the
punchline is that F^-1 is simply diag of the probability vector.
"""

import numpy as np

from disnes import BernoulliParams, CategoricalParams, GaussianParams, LOGITS, PROBS


def main():
    rng = np.random.default_rng(0)

    print("== Bernoulli ==")
    p = BernoulliParams(0.3)
    xs = p.sample(rng, size=10)
    print("draws:", xs)
    print("score at x=1:", p.score(1), " at x=0:", p.score(0))
    print("fisher:", p.fim(), " (= 1/(theta(1-theta)))")
    print("natural score at x=1:", p.natural_score(1), " (= x - theta)")

    print("\n== Categorical (logit parametrization) ==")
    c = CategoricalParams(np.log([0.2, 0.3, 0.5]), mode=LOGITS)
    print("probs:", c.probs())
    print("score at x=2:", c.score(2), " (= onehot - p)")
    print("entropy (nats):", c.entropy())

    print("\n== Categorical (explicit probability parametrization) ==")
    cp = CategoricalParams(np.array([0.2, 0.3, 0.5]), mode=PROBS)
    print("inverse fisher (diagonal):", cp.inverse_fim(), " (= the probs!)")
    print("natural score at x=2:", cp.natural_score(2),
          " (= p * (onehot - p))")

    print("\n== Gaussian (mu, log sigma) ==")
    g = GaussianParams(1.0, 0.0)
    xs = g.sample(rng, size=5)
    print("draws:", xs)
    print("score at x=2.0:", g.score(2.0))
    print("natural score at x=2.0:", g.natural_score(2.0))

    print("\nMonte Carlo check that the score is zero-mean:")
    for name, d in [("bernoulli", p), ("categorical", c), ("gaussian", g)]:
        s = d.score(d.sample(rng, size=200_000))
        print(f"  {name}: mean score = {np.atleast_2d(s).mean(axis=0)}")


if __name__ == "__main__":
    main()
