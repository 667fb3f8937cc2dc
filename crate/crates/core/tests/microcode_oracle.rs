mod common;

use common::{opcode_of, oracle_cost, oracle_row_count, oracle_run, oracle_walk, random_program};
use cslow::isa::{assemble_str, decode, encode, Mnemonic};
use cslow::microcode::{instruction_cycle_cost, microprogram, run, FETCH, HALT};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn taken_options(m: Mnemonic) -> Vec<Option<bool>> {
    if m.is_branch() {
        vec![Some(false), Some(true)]
    } else {
        vec![None]
    }
}

#[test]
fn store_has_as_many_rows_as_the_table() {
    assert_eq!(microprogram().rows().len(), oracle_row_count());
    assert_eq!(oracle_row_count(), 53);
}

#[test]
fn encodings_agree_with_the_oracle() {
    for m in Mnemonic::ALL {
        assert_eq!(encode(m), opcode_of(m), "{m}");
        assert_eq!(decode(opcode_of(m)), m);
    }
}

#[test]
fn static_costs_match_the_table_walk() {
    for m in Mnemonic::ALL {
        for taken in taken_options(m) {
            let oracle = oracle_cost(m, taken.unwrap_or(false));
            assert_eq!(instruction_cycle_cost(m, taken), oracle, "{m} {taken:?}");
        }
    }
}

#[test]
fn known_costs() {
    let expect = [
        (Mnemonic::Cma, 6),
        (Mnemonic::Inca, 7),
        (Mnemonic::Dcra, 8),
        (Mnemonic::Halt, 7),
        (Mnemonic::Load, 11),
        (Mnemonic::Sto, 10),
        (Mnemonic::Add, 12),
        (Mnemonic::Sub, 12),
        (Mnemonic::And, 12),
        (Mnemonic::Joz, 11),
        (Mnemonic::Joc, 12),
    ];
    for (m, cycles) in expect {
        assert_eq!(oracle_cost(m, false), cycles, "{m}");
        assert_eq!(oracle_cost(m, true), cycles, "{m}");
    }
}

#[test]
fn walk_visits_expected_rows() {
    let (_, rows) = oracle_walk(opcode_of(Mnemonic::Sub), false, false);
    assert_eq!(rows, vec![1, 2, 3, 14, 15, 32, 33, 34, 35, 36, 39, 40]);
    let (_, rows) = oracle_walk(opcode_of(Mnemonic::Joz), true, false);
    assert_eq!(rows, vec![1, 2, 3, 14, 15, 16, 41, 42, 44, 50, 51]);
    assert_eq!(FETCH, 1);
    assert_eq!(HALT, 52);
}

#[test]
fn observed_costs_match_for_every_mnemonic() {
    // Each program runs its mnemonic once with flags set both ways where it
    // matters, then halts.
    let cases = [
        ("CMA\nHALT", Mnemonic::Cma),
        ("INCA\nHALT", Mnemonic::Inca),
        ("DCRA\nHALT", Mnemonic::Dcra),
        ("AND X\nHALT\nX: .word 3", Mnemonic::And),
        ("LOAD X\nHALT\nX: .word 3", Mnemonic::Load),
        ("STO X\nHALT\nX: .word 3", Mnemonic::Sto),
        ("ADD X\nHALT\nX: .word 3", Mnemonic::Add),
        ("SUB X\nHALT\nX: .word 3", Mnemonic::Sub),
        ("JOZ E\nE: HALT", Mnemonic::Joz),
        ("ADD Z\nJOZ E\nE: HALT\nZ: .word 0", Mnemonic::Joz),
        ("JOC E\nE: HALT", Mnemonic::Joc),
        ("SUB Z\nJOC E\nE: HALT\nZ: .word 0", Mnemonic::Joc),
        ("HALT", Mnemonic::Halt),
    ];
    for (src, m) in cases {
        let image = assemble_str(src, 0).unwrap().image;
        let outcome = run(&image, 10_000, false).unwrap();
        let oracle = oracle_run(&image, 100).unwrap();
        assert_eq!(outcome.cycles(), oracle.cycles, "{src}");
        let r = outcome.retired.iter().find(|r| r.mnemonic == m).unwrap();
        assert_eq!(r.cycles, oracle_cost(m, r.taken.unwrap_or(false)), "{src}");
    }
}

#[test]
fn cma_halt_takes_fourteen_cycles() {
    let image = assemble_str("CMA\nHALT\n", 0).unwrap().image;
    assert_eq!(run(&image, 100, false).unwrap().cycles(), 14);
    assert_eq!(oracle_run(&image, 10).unwrap().cycles, 14);
}

#[test]
fn random_programs_match_the_instruction_level_oracle() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for _ in 0..300 {
        let image = random_program(&mut rng);
        let outcome = run(&image, 1_000_000, false).unwrap();
        let oracle = oracle_run(&image, 10_000).unwrap();
        assert_eq!(outcome.cycles(), oracle.cycles);
        assert_eq!(outcome.memory, oracle.memory);
        assert_eq!(outcome.state.a, oracle.a);
        assert_eq!((outcome.state.z, outcome.state.c), (oracle.z, oracle.c));
        assert_eq!(outcome.retired.len(), oracle.instructions);
        for r in &outcome.retired {
            assert_eq!(r.cycles, oracle_cost(r.mnemonic, r.taken.unwrap_or(false)));
        }
    }
}
