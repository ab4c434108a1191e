fn main() {
    // Dense symmetric eigensolves go through the system LAPACK (shipped
    // inside OpenBLAS on this platform).
    println!("cargo:rustc-link-lib=dylib=openblas");
}
