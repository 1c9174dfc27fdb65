from sensorimap.cli import main

raise SystemExit(main())
