//! Two-pass assembly, listing output, and a disassembly round trip.

use cslow::corpus::DIVIDE_ASM;
use cslow::isa::{assemble, assemble_str, disassemble};

fn main() {
    let asm = assemble_str(DIVIDE_ASM, 0).expect("bundled program assembles");
    for entry in &asm.listing {
        println!("{entry}");
    }
    let mut labels: Vec<_> = asm.labels.iter().collect();
    labels.sort_by_key(|(_, addr)| **addr);
    for (name, addr) in labels {
        println!("{name:>8} = 0x{addr:02x}");
    }

    let used = asm
        .listing
        .iter()
        .map(|e| e.address as usize + e.words.len())
        .max()
        .unwrap_or(0);
    let source = disassemble(&asm.image, 0, used);
    let again = assemble(&source, 0).expect("disassembly reassembles");
    assert_eq!(again.image, asm.image);
    println!("disassembly of {used} cells reassembles to the same image");
}
