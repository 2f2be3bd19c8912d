from distrag.cli import main

main()
