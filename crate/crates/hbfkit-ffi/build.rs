use std::path::PathBuf;

fn main() {
    let crate_dir = PathBuf::from(std::env::var("CARGO_MANIFEST_DIR").unwrap());
    let header = crate_dir.join("include").join("hbfkit.h");

    // Regenerate the C header from the Rust sources. The committed header
    // is kept in sync by this step; if generation fails (e.g. while the
    // sources are mid-edit), the previous header stays in place and the
    // build itself is not blocked.
    match cbindgen::generate(&crate_dir) {
        Ok(bindings) => {
            bindings.write_to_file(&header);
        }
        Err(err) => {
            println!("cargo:warning=cbindgen failed, keeping existing header: {err}");
        }
    }
    println!("cargo:rerun-if-changed=src/lib.rs");
    println!("cargo:rerun-if-changed=cbindgen.toml");
}
