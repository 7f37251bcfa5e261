//! Context assembly and output parsing, with the echo and top-1 backends.

use climafact::fid::{assemble, format_output, parse_output};
use climafact::{Generator, GeneratorBackend, VeracityLabel};

fn main() -> climafact::Result<()> {
    let passages = [
        "Global mean sea level has risen about 21 cm since 1880.",
        "The rate of sea level rise has accelerated in recent decades.",
    ];
    let input = assemble("c42", "Sea level rise is slowing down.", &passages, 200)?;
    for ctx in &input.contexts {
        println!("{ctx}");
    }

    for backend in [GeneratorBackend::Echo, GeneratorBackend::Top1] {
        let out = Generator::new(backend.clone()).generate(&input)?;
        println!(
            "{}: label={:?} explanation={:?}",
            backend.name(),
            out.label,
            out.explanation
        );
    }

    let raw = format_output(VeracityLabel::Refutes, "Sea level rise is accelerating.");
    println!("{raw:?} -> {:?}", parse_output(&raw));
    println!("{:?}", parse_output("no label given"));
    Ok(())
}
