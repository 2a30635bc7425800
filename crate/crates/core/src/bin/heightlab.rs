fn main() {
    heightlab::cli::main()
}
