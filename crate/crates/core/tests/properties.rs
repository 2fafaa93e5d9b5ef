use pairlab::adversaries::{Behavior, Server};
use pairlab::algebra::{G1Elem, G2Elem, PairingOps, PairingParams};
use pairlab::protocols::cm::CmSetup;
use pairlab::protocols::Protocol;
use pairlab::randtable::RandTable;
use pairlab::simnet::{run_session, Deployment, SessionOptions, Verdict};
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;

fn large() -> PairingParams {
    PairingParams::large()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn honest_sessions_return_the_pairing(a in 0..1_277_931_859u64, b in 0..1_277_931_859u64, seed: u64) {
        let p = large();
        let truth = p.pair(G1Elem::new(a), G2Elem::new(b));
        for protocol in [Protocol::Chen, Protocol::Revised] {
            let mut table = RandTable::generate(&p, 3, seed).unwrap();
            let (mut u1, mut u2) = (Server::new(Behavior::Honest), Server::new(Behavior::Honest));
            let dep = Deployment::TwoServer { table: &mut table, u1: &mut u1, u2: &mut u2 };
            let r = run_session(&p, &SessionOptions::new(protocol, 0, seed), G1Elem::new(a), G2Elem::new(b), dep).unwrap();
            prop_assert_eq!(r.output, Some(truth));
        }
        let setup = CmSetup::random(&p, &mut ChaCha20Rng::seed_from_u64(seed));
        let mut server = Server::new(Behavior::Honest);
        let dep = Deployment::SingleServer { setup: &setup, server: &mut server };
        let r = run_session(&p, &SessionOptions::new(Protocol::Cm, 0, seed), G1Elem::new(a), G2Elem::new(b), dep).unwrap();
        prop_assert_eq!(r.verdict, Verdict::Accepted);
        prop_assert_eq!(r.output, Some(truth));
    }

    #[test]
    fn rho_attack_shifts_output_by_known_residual(a in 0..1_277_931_859u64, b in 0..1_277_931_859u64, seed: u64, rho_seed: u64) {
        let p = large();
        let mut table = RandTable::generate(&p, 3, seed).unwrap();
        let mut u1 = Server::new(Behavior::RhoSubstitution { seed: rho_seed });
        let mut u2 = Server::new(Behavior::Honest);
        let dep = Deployment::TwoServer { table: &mut table, u1: &mut u1, u2: &mut u2 };
        let r = run_session(&p, &SessionOptions::new(Protocol::Chen, 0, seed), G1Elem::new(a), G2Elem::new(b), dep).unwrap();
        prop_assert_eq!(r.verdict, Verdict::Accepted);
        let residual = r.residual(&p).unwrap();
        prop_assert_ne!(residual, pairlab::algebra::GtElem::ONE);
        prop_assert_eq!(p.gt_mul(r.truth, residual), r.output.unwrap());
    }
}
