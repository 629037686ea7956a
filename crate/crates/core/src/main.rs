fn main() {
    unitaylor::cli::main()
}
